#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace convexnet::ad {

/// Forward-mode number carrying a value and N directional derivatives.
///
/// The coefficient type T may itself be a Jet, so Jet<Jet<double, 1>, 1>
/// carries second derivatives and three levels of nesting carry third
/// derivatives. All arithmetic applies the sum/product/chain rules to the
/// stored coefficients exactly; there is no truncation error.
template <class T, int N>
struct Jet {
  T a{};
  std::array<T, N> v{};

  constexpr Jet() = default;

  template <class U, std::enable_if_t<std::is_convertible_v<U, T>, int> = 0>
  constexpr Jet(const U& value) : a(value) {}  // NOLINT: implicit promotion of constants

  constexpr Jet(const T& value, const std::array<T, N>& derivatives) : a(value), v(derivatives) {}

  /// Variable seeded along coordinate `k`.
  static constexpr Jet variable(const T& value, int k) {
    Jet x(value);
    x.v[k] = T(1.0);
    return x;
  }

  Jet& operator+=(const Jet& y) { return *this = *this + y; }
  Jet& operator-=(const Jet& y) { return *this = *this - y; }
  Jet& operator*=(const Jet& y) { return *this = *this * y; }
  Jet& operator/=(const Jet& y) { return *this = *this / y; }
};

template <class T>
struct is_jet : std::false_type {};
template <class T, int N>
struct is_jet<Jet<T, N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Jet<T, N>& x) {
  return value_of(x.a);
}

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = -x.a;
  for (int i = 0; i < N; ++i) r.v[i] = -x.v[i];
  return r;
}

template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  r.a = x.a + y.a;
  for (int i = 0; i < N; ++i) r.v[i] = x.v[i] + y.v[i];
  return r;
}

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  r.a = x.a - y.a;
  for (int i = 0; i < N; ++i) r.v[i] = x.v[i] - y.v[i];
  return r;
}

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  r.a = x.a * y.a;
  for (int i = 0; i < N; ++i) r.v[i] = x.a * y.v[i] + x.v[i] * y.a;
  return r;
}

template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  const T inv = T(1.0) / y.a;
  r.a = x.a * inv;
  for (int i = 0; i < N; ++i) r.v[i] = (x.v[i] - r.a * y.v[i]) * inv;
  return r;
}

template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& x, double c) {
  Jet<T, N> r = x;
  r.a = x.a + c;
  return r;
}
template <class T, int N>
Jet<T, N> operator+(double c, const Jet<T, N>& x) {
  return x + c;
}
template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& x, double c) {
  return x + (-c);
}
template <class T, int N>
Jet<T, N> operator-(double c, const Jet<T, N>& x) {
  return (-x) + c;
}
template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& x, double c) {
  Jet<T, N> r;
  r.a = x.a * c;
  for (int i = 0; i < N; ++i) r.v[i] = x.v[i] * c;
  return r;
}
template <class T, int N>
Jet<T, N> operator*(double c, const Jet<T, N>& x) {
  return x * c;
}
template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& x, double c) {
  return x * (1.0 / c);
}
template <class T, int N>
Jet<T, N> operator/(double c, const Jet<T, N>& x) {
  return Jet<T, N>(c) / x;
}

// Chain rule for a scalar primitive with value fa and derivative dfa at x.a.
template <class T, int N>
Jet<T, N> chain(const Jet<T, N>& x, const T& fa, const T& dfa) {
  Jet<T, N> r;
  r.a = fa;
  for (int i = 0; i < N; ++i) r.v[i] = dfa * x.v[i];
  return r;
}

template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& x) {
  using std::exp;
  const T e = exp(x.a);
  return chain(x, e, e);
}

template <class T, int N>
Jet<T, N> log(const Jet<T, N>& x) {
  using std::log;
  return chain(x, log(x.a), T(1.0) / x.a);
}

template <class T, int N>
Jet<T, N> sqrt(const Jet<T, N>& x) {
  using std::sqrt;
  const T s = sqrt(x.a);
  return chain(x, s, T(0.5) / s);
}

template <class T, int N>
Jet<T, N> pow(const Jet<T, N>& x, double p) {
  using std::pow;
  return chain(x, pow(x.a, p), p * pow(x.a, p - 1.0));
}

template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& x) {
  using std::cos;
  using std::sin;
  return chain(x, sin(x.a), cos(x.a));
}

template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& x) {
  using std::cos;
  using std::sin;
  return chain(x, cos(x.a), -sin(x.a));
}

template <class T, int N>
Jet<T, N> tanh(const Jet<T, N>& x) {
  using std::tanh;
  const T t = tanh(x.a);
  return chain(x, t, T(1.0) - t * t);
}

template <class T, int N>
Jet<T, N> abs(const Jet<T, N>& x) {
  return value_of(x) < 0.0 ? -x : x;
}

template <class T, int N>
bool operator<(const Jet<T, N>& x, const Jet<T, N>& y) {
  return value_of(x) < value_of(y);
}
template <class T, int N>
bool operator>(const Jet<T, N>& x, const Jet<T, N>& y) {
  return value_of(x) > value_of(y);
}

}  // namespace convexnet::ad
