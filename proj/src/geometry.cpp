#include "convexnet/geometry.hpp"

#include <cstdio>
#include <numbers>
#include <sstream>

namespace convexnet {

double cloud_hausdorff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto directed = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < q.cols() && best > worst; ++j)
        best = std::min(best, (p.col(i) - q.col(j)).squaredNorm());
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

Eigen::MatrixXd uv_sphere_grid(int rows, int cols) {
  if (rows < 2 || cols < 3) throw std::invalid_argument("UV grid needs rows ≥ 2 and cols ≥ 3");
  constexpr double pi = std::numbers::pi;
  Eigen::MatrixXd g(3, rows * cols);
  for (int i = 0; i < rows; ++i) {
    const double t = pi * (i + 0.5) / rows;
    for (int j = 0; j < cols; ++j) {
      const double f = 2.0 * pi * j / cols;
      g.col(i * cols + j) << std::sin(t) * std::cos(f), std::sin(t) * std::sin(f), std::cos(t);
    }
  }
  return g;
}

std::vector<std::array<int, 3>> uv_sphere_triangles(int rows, int cols) {
  std::vector<std::array<int, 3>> tri;
  auto id = [cols](int i, int j) { return i * cols + (j % cols); };
  for (int j = 1; j + 1 < cols; ++j) tri.push_back({id(0, 0), id(0, j), id(0, j + 1)});
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      tri.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tri.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  const int last = rows - 1;
  for (int j = 1; j + 1 < cols; ++j) tri.push_back({id(last, 0), id(last, j + 1), id(last, j)});
  return tri;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string polyline_csv(const Eigen::MatrixXd& pts) {
  std::ostringstream out;
  out << "x,y\n";
  for (Eigen::Index i = 0; i < pts.cols(); ++i) out << fmt(pts(0, i)) << "," << fmt(pts(1, i)) << "\n";
  return out.str();
}

std::string polyline_svg(const Eigen::MatrixXd& pts) {
  const double lo_x = pts.row(0).minCoeff(), hi_x = pts.row(0).maxCoeff();
  const double lo_y = pts.row(1).minCoeff(), hi_y = pts.row(1).maxCoeff();
  const double pad = 0.05 * std::max(hi_x - lo_x, hi_y - lo_y);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt(lo_x - pad) << " "
      << fmt(-hi_y - pad) << " " << fmt(hi_x - lo_x + 2 * pad) << " " << fmt(hi_y - lo_y + 2 * pad)
      << "\">\n<path fill=\"none\" stroke=\"black\" stroke-width=\""
      << fmt(0.005 * std::max(hi_x - lo_x, hi_y - lo_y)) << "\" d=\"";
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    out << (i ? " L " : "M ") << fmt(pts(0, i)) << " " << fmt(-pts(1, i));
  out << " Z\"/>\n</svg>\n";
  return out.str();
}

std::string mesh_obj(const Mesh& mesh) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < mesh.vertices.cols(); ++i)
    out << "v " << fmt(mesh.vertices(0, i)) << " " << fmt(mesh.vertices(1, i)) << " "
        << fmt(mesh.vertices(2, i)) << "\n";
  for (Eigen::Index i = 0; i < mesh.normals.cols(); ++i)
    out << "vn " << fmt(mesh.normals(0, i)) << " " << fmt(mesh.normals(1, i)) << " "
        << fmt(mesh.normals(2, i)) << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << "//" << t[0] + 1 << " " << t[1] + 1 << "//" << t[1] + 1 << " "
        << t[2] + 1 << "//" << t[2] + 1 << "\n";
  return out.str();
}

}  // namespace convexnet
