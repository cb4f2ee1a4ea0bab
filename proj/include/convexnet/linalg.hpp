#pragma once

// Small dense linear algebra on any scalar type (double, Jet, Var). Sizes are
// bounded by the spatial dimension, so storage never allocates.

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "convexnet/autodiff/eigen_support.hpp"
#include "convexnet/errors.hpp"

namespace convexnet {

inline constexpr int kMaxDim = 4;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using Point = Eigen::VectorXd;

using ad::value_of;

template <class S>
Vec<S> cast_vec(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Vec<S> r(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) r[i] = S(x[i]);
  return r;
}

template <class S>
S dot(const Vec<S>& a, const Vec<S>& b) {
  S s(0.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
  return s;
}

template <class S>
S norm(const Vec<S>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <class S>
Vec<double> values(const Vec<S>& a) {
  Vec<double> r(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r[i] = value_of(a[i]);
  return r;
}

template <class S>
Mat<double> values(const Mat<S>& a) {
  Mat<double> r(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(i, j) = value_of(a(i, j));
  return r;
}

template <class S>
Mat<S> matmul(const Mat<S>& a, const Mat<S>& b) {
  Mat<S> r(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      S s(0.0);
      for (Eigen::Index k = 0; k < a.cols(); ++k) s = s + a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

template <class S>
Vec<S> matvec(const Mat<S>& a, const Vec<S>& x) {
  Vec<S> r(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    S s(0.0);
    for (Eigen::Index k = 0; k < a.cols(); ++k) s = s + a(i, k) * x[k];
    r[i] = s;
  }
  return r;
}

template <class S>
Vec<S> matTvec(const Mat<S>& a, const Vec<S>& x) {
  Vec<S> r(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    S s(0.0);
    for (Eigen::Index k = 0; k < a.rows(); ++k) s = s + a(k, j) * x[k];
    r[j] = s;
  }
  return r;
}

template <class S>
Mat<S> transpose(const Mat<S>& a) {
  Mat<S> r(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

template <class S>
S trace(const Mat<S>& a) {
  S s(0.0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) s = s + a(i, i);
  return s;
}

template <class S>
Mat<S> identity(int n) {
  Mat<S> r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = S(i == j ? 1.0 : 0.0);
  return r;
}

/// LU factorization with partial pivoting (pivots chosen on values).
template <class S>
class SmallLu {
 public:
  explicit SmallLu(const Mat<S>& a) : lu_(a), perm_(a.rows()) {
    const int n = static_cast<int>(a.rows());
    for (int i = 0; i < n; ++i) perm_[i] = i;
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(value_of(lu_(k, k)));
      for (int i = k + 1; i < n; ++i) {
        const double v = std::abs(value_of(lu_(i, k)));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (p != k) {
        lu_.row(k).swap(lu_.row(p));
        std::swap(perm_[k], perm_[p]);
        sign_ = -sign_;
      }
      if (best == 0.0) {
        singular_ = true;
        continue;
      }
      for (int i = k + 1; i < n; ++i) {
        lu_(i, k) = lu_(i, k) / lu_(k, k);
        for (int j = k + 1; j < n; ++j) lu_(i, j) = lu_(i, j) - lu_(i, k) * lu_(k, j);
      }
    }
  }

  bool singular() const { return singular_; }

  S determinant() const {
    S det(sign_);
    for (Eigen::Index i = 0; i < lu_.rows(); ++i) det = det * lu_(i, i);
    return det;
  }

  Vec<S> solve(const Vec<S>& b) const {
    const int n = static_cast<int>(lu_.rows());
    Vec<S> y(n);
    for (int i = 0; i < n; ++i) {
      S s = b[perm_[i]];
      for (int j = 0; j < i; ++j) s = s - lu_(i, j) * y[j];
      y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      S s = y[i];
      for (int j = i + 1; j < n; ++j) s = s - lu_(i, j) * y[j];
      y[i] = s / lu_(i, i);
    }
    return y;
  }

  /// Solves aᵀ x = b.
  Vec<S> solve_transposed(const Vec<S>& b) const {
    const int n = static_cast<int>(lu_.rows());
    // aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = Pᵀ w.
    Vec<S> z(n);
    for (int i = 0; i < n; ++i) {
      S s = b[i];
      for (int j = 0; j < i; ++j) s = s - lu_(j, i) * z[j];
      z[i] = s / lu_(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      S s = z[i];
      for (int j = i + 1; j < n; ++j) s = s - lu_(j, i) * z[j];
      z[i] = s;
    }
    Vec<S> x(n);
    for (int i = 0; i < n; ++i) x[perm_[i]] = z[i];
    return x;
  }

  Mat<S> inverse() const {
    const int n = static_cast<int>(lu_.rows());
    Mat<S> inv(n, n);
    for (int j = 0; j < n; ++j) {
      Vec<S> e(n);
      for (int i = 0; i < n; ++i) e[i] = S(i == j ? 1.0 : 0.0);
      inv.col(j) = solve(e);
    }
    return inv;
  }

 private:
  Mat<S> lu_;
  Eigen::Matrix<int, Eigen::Dynamic, 1, 0, kMaxDim, 1> perm_;
  double sign_ = 1.0;
  bool singular_ = false;
};

}  // namespace convexnet
