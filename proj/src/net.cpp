#include "convexnet/net.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "convexnet/quadrature.hpp"

namespace convexnet {

std::vector<double> SublinearNet::flatten() const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  theta.push_back(log_beta);
  for (int j = 0; j < directions; ++j)
    for (int i = 0; i < dim; ++i) theta.push_back(W(i, j));
  return theta;
}

SublinearNet SublinearNet::unflatten(int dim, int directions, std::span<const double> theta) {
  if (theta.size() != 1 + static_cast<std::size_t>(dim) * directions)
    throw std::invalid_argument("parameter vector length does not match net shape");
  const auto p = NetParams<double>::from_flat(dim, directions, theta);
  return {p.log_beta, p.W};
}

SymmetryGroup::SymmetryGroup(std::vector<Eigen::MatrixXd> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw std::invalid_argument("symmetry group has no elements");
  const auto d = elements_.front().rows();
  auto find = [&](const Eigen::MatrixXd& m) {
    for (const auto& e : elements_)
      if ((e - m).cwiseAbs().maxCoeff() <= 1e-12) return true;
    return false;
  };
  for (const auto& g : elements_) {
    if (g.rows() != d || g.cols() != d) throw std::invalid_argument("group element has wrong shape");
    if ((g.transpose() * g - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("group element is not orthogonal");
  }
  if (!find(Eigen::MatrixXd::Identity(d, d)))
    throw std::invalid_argument("symmetry group lacks the identity");
  for (const auto& g : elements_)
    for (const auto& h : elements_)
      if (!find(g * h)) throw std::invalid_argument("symmetry group is not closed under products");
}

SymmetryGroup SymmetryGroup::trivial(int dim) {
  return SymmetryGroup({Eigen::MatrixXd::Identity(dim, dim)});
}

SymmetryGroup SymmetryGroup::cyclic_rotations(int n) {
  if (n < 1) throw std::invalid_argument("rotation order must be positive");
  std::vector<Eigen::MatrixXd> els;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    Eigen::MatrixXd r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    // Snap rounding so products land on listed elements.
    for (Eigen::Index i = 0; i < 4; ++i)
      if (std::abs(r.data()[i]) < 1e-15) r.data()[i] = 0.0;
    els.push_back(r);
  }
  return SymmetryGroup(std::move(els));
}

double eval(const SublinearNet& net, const Point& x) { return as_function(net).value(x); }

Eigen::VectorXd eval_grad(const SublinearNet& net, const Point& x) {
  return as_function(net).derivatives(x, 1).grad;
}

Eigen::MatrixXd eval_hess(const SublinearNet& net, const Point& x) {
  return as_function(net).derivatives(x, 2).hess;
}

Eigen::VectorXd eval_third(const SublinearNet& net, const Point& x, const Point& a, const Point& b) {
  const auto j = as_function(net).derivatives(x, 3);
  Eigen::VectorXd out(net.dim);
  for (int k = 0; k < net.dim; ++k) out[k] = a.dot(Eigen::MatrixXd(j.third[k]) * b);
  return out;
}

double symmetrized_eval(const SymmetrizedNet& net, const Point& x) {
  return as_function(net).value(x);
}

Eigen::VectorXd symmetrized_grad(const SymmetrizedNet& net, const Point& x) {
  return as_function(net).derivatives(x, 1).grad;
}

SublinearNet from_polytope_support(const Eigen::MatrixXd& vertices, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (vertices.cols() < 1) throw std::invalid_argument("polytope needs at least one vertex");
  return {std::log(beta), vertices / beta};
}

SublinearNet from_polytope_gauge(const Eigen::MatrixXd& normals, double beta) {
  return from_polytope_support(normals, beta);
}

double min_on_nodes(const NetFunction<double>& fn, const SphereRule& rule) {
  double mn = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rule.size(); ++i) mn = std::min(mn, fn.value(rule.nodes.col(i)));
  return mn;
}

double min_on_nodes_lower_bound(const SymmetrizedNet& net, const SphereRule& rule) {
  const auto& W = net.base.W;
  const double log_m = std::log(static_cast<double>(net.base.directions));
  const auto& elements = net.group.elements();
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(rule.size());
  auto add = [&](const Eigen::MatrixXd& U) {
    const Eigen::MatrixXd Z = W.transpose() * U;
    acc += Z.colwise().maxCoeff().cwiseMax((Z.colwise().mean().array() + log_m).matrix());
  };
  if (elements.empty()) {
    add(rule.nodes);
  } else {
    for (const auto& g : elements) add(g * rule.nodes);
    acc /= static_cast<double>(elements.size());
  }
  const double b = net.base.beta() * acc.minCoeff();
  return std::isfinite(b) ? b : -1.0;
}

bool validate_positive(const SublinearNet& net, const SphereRule& rule, double eps) {
  return min_on_nodes(as_function(net), rule) >= eps;
}

bool validate_positive(const SymmetrizedNet& net, const SphereRule& rule, double eps) {
  return min_on_nodes(as_function(net), rule) >= eps;
}

namespace {

double sphere_mean(const NetFunction<double>& fn, const SphereRule& rule) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i) s += rule.weights[i] * fn.value(rule.nodes.col(i));
  return s / rule.weights.sum();
}

double normalized_log_beta(double log_beta, double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw InitializationError("mean of the net over the sphere is not positive");
  return log_beta - std::log(mean);
}

}  // namespace

SublinearNet normalize_scale(const SublinearNet& net, const SphereRule& rule) {
  SublinearNet out = net;
  out.log_beta = normalized_log_beta(net.log_beta, sphere_mean(as_function(net), rule));
  return out;
}

SymmetrizedNet normalize_scale(const SymmetrizedNet& net, const SphereRule& rule) {
  SymmetrizedNet out = net;
  out.base.log_beta = normalized_log_beta(net.base.log_beta, sphere_mean(as_function(net), rule));
  return out;
}

SublinearNet random_net(int dim, int directions, std::uint64_t seed, const SphereRule& rule) {
  if (directions < 1) throw std::invalid_argument("net needs at least one direction");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd W(dim, directions);
  for (int j = 0; j < directions; ++j) {
    Eigen::VectorXd w(dim);
    do {
      for (int i = 0; i < dim; ++i) w[i] = normal(rng);
    } while (w.norm() < 1e-8);
    W.col(j) = w / w.norm();
  }
  return normalize_scale(SublinearNet(0.0, W), rule);
}

void write_net(std::ostream& out, const SublinearNet& net, const SymmetryGroup* group) {
  out << std::setprecision(17);
  out << "dimension " << net.dim << "\n";
  out << "directions " << net.directions << "\n";
  out << "log_beta " << net.log_beta << "\n";
  out << "W\n";
  for (int i = 0; i < net.dim; ++i) {
    for (int j = 0; j < net.directions; ++j) out << (j ? " " : "") << net.W(i, j);
    out << "\n";
  }
  const std::size_t g = group && !group->is_trivial() ? group->order() : 0;
  out << "group " << g << "\n";
  for (std::size_t k = 0; k < g; ++k) {
    const auto& m = group->elements()[k];
    for (int i = 0; i < net.dim; ++i) {
      for (int j = 0; j < net.dim; ++j) out << (j ? " " : "") << m(i, j);
      out << "\n";
    }
  }
}

SymmetrizedNet read_net(std::istream& in) {
  auto expect = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key)
      throw std::runtime_error(std::string("net file: expected '") + key + "'");
  };
  int d = 0, m = 0;
  double log_beta = 0.0;
  expect("dimension");
  in >> d;
  expect("directions");
  in >> m;
  expect("log_beta");
  in >> log_beta;
  if (!in || d < 2 || d > kMaxDim || m < 1) throw std::runtime_error("net file: bad header");
  expect("W");
  Eigen::MatrixXd W(d, m);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < m; ++j) in >> W(i, j);
  std::size_t g = 0;
  expect("group");
  in >> g;
  if (!in) throw std::runtime_error("net file: truncated");
  SymmetrizedNet out{SublinearNet(log_beta, W), SymmetryGroup::trivial(d)};
  if (g > 0) {
    std::vector<Eigen::MatrixXd> els(g, Eigen::MatrixXd(d, d));
    for (auto& e : els)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) in >> e(i, j);
    if (!in) throw std::runtime_error("net file: truncated group");
    out.group = SymmetryGroup(std::move(els));
  }
  return out;
}

void save_net(const std::string& path, const SublinearNet& net, const SymmetryGroup* group) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_net(f, net, group);
}

SymmetrizedNet load_net(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_net(f);
}

}  // namespace convexnet
