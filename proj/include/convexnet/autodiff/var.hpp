#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace convexnet::ad {

/// Reverse-mode tape. One per thread; entries record up to two parents with
/// their local partial derivatives.
class Tape {
 public:
  struct Entry {
    std::int32_t a;
    std::int32_t b;
    double da;
    double db;
  };

  static Tape& current() {
    thread_local Tape tape;
    return tape;
  }

  std::int32_t push(std::int32_t a, double da, std::int32_t b, double db) {
    entries_.push_back({a, b, da, db});
    return static_cast<std::int32_t>(entries_.size() - 1);
  }

  std::size_t size() const { return entries_.size(); }
  void rewind(std::size_t mark) { entries_.resize(mark); }

  /// Propagates `seed` from entry `top` down to entry `bottom` (inclusive).
  /// Adjoints of every entry in [bottom, top] are left in `adjoint()` and must
  /// be cleared by the caller before the next sweep.
  void sweep(std::int32_t top, double seed, std::size_t bottom) {
    if (adjoint_.size() < entries_.size()) adjoint_.resize(entries_.size(), 0.0);
    adjoint_[top] += seed;
    for (std::int64_t i = top; i >= static_cast<std::int64_t>(bottom); --i) {
      const double g = adjoint_[i];
      if (g == 0.0) continue;
      const Entry& e = entries_[i];
      if (e.a >= 0) adjoint_[e.a] += g * e.da;
      if (e.b >= 0) adjoint_[e.b] += g * e.db;
    }
  }

  std::vector<double>& adjoint() { return adjoint_; }

 private:
  std::vector<Entry> entries_;
  std::vector<double> adjoint_;
};

/// Scalar recorded on the thread's tape. Index -1 marks a constant.
class Var {
 public:
  Var() = default;
  Var(double c) : value_(c) {}  // NOLINT: implicit promotion of constants

  double value() const { return value_; }
  std::int32_t index() const { return index_; }
  bool is_constant() const { return index_ < 0; }

  /// New independent variable (a tape entry without parents).
  static Var leaf(double value) {
    Var r(value);
    r.index_ = Tape::current().push(-1, 0.0, -1, 0.0);
    return r;
  }

  static Var unary(double value, const Var& x, double dx) {
    Var r(value);
    if (!x.is_constant()) r.index_ = Tape::current().push(x.index_, dx, -1, 0.0);
    return r;
  }

  static Var binary(double value, const Var& x, double dx, const Var& y, double dy) {
    if (x.is_constant()) return unary(value, y, dy);
    if (y.is_constant()) return unary(value, x, dx);
    Var r(value);
    r.index_ = Tape::current().push(x.index_, dx, y.index_, dy);
    return r;
  }

  Var& operator+=(const Var& y) { return *this = *this + y; }
  Var& operator-=(const Var& y) { return *this = *this - y; }
  Var& operator*=(const Var& y) { return *this = *this * y; }
  Var& operator/=(const Var& y) { return *this = *this / y; }

  friend Var operator-(const Var& x) { return unary(-x.value_, x, -1.0); }
  friend Var operator+(const Var& x, const Var& y) {
    return binary(x.value_ + y.value_, x, 1.0, y, 1.0);
  }
  friend Var operator-(const Var& x, const Var& y) {
    return binary(x.value_ - y.value_, x, 1.0, y, -1.0);
  }
  friend Var operator*(const Var& x, const Var& y) {
    return binary(x.value_ * y.value_, x, y.value_, y, x.value_);
  }
  friend Var operator/(const Var& x, const Var& y) {
    const double inv = 1.0 / y.value_;
    const double q = x.value_ * inv;
    return binary(q, x, inv, y, -q * inv);
  }
  friend Var operator+(const Var& x, double c) { return unary(x.value_ + c, x, 1.0); }
  friend Var operator+(double c, const Var& x) { return unary(x.value_ + c, x, 1.0); }
  friend Var operator-(const Var& x, double c) { return unary(x.value_ - c, x, 1.0); }
  friend Var operator-(double c, const Var& x) { return unary(c - x.value_, x, -1.0); }
  friend Var operator*(const Var& x, double c) { return unary(x.value_ * c, x, c); }
  friend Var operator*(double c, const Var& x) { return unary(x.value_ * c, x, c); }
  friend Var operator/(const Var& x, double c) { return unary(x.value_ / c, x, 1.0 / c); }
  friend Var operator/(double c, const Var& x) {
    const double q = c / x.value_;
    return unary(q, x, -q / x.value_);
  }

  friend Var exp(const Var& x) {
    const double e = std::exp(x.value_);
    return unary(e, x, e);
  }
  friend Var log(const Var& x) { return unary(std::log(x.value_), x, 1.0 / x.value_); }
  friend Var sqrt(const Var& x) {
    const double s = std::sqrt(x.value_);
    return unary(s, x, 0.5 / s);
  }
  friend Var pow(const Var& x, double p) {
    return unary(std::pow(x.value_, p), x, p * std::pow(x.value_, p - 1.0));
  }
  friend Var sin(const Var& x) { return unary(std::sin(x.value_), x, std::cos(x.value_)); }
  friend Var cos(const Var& x) { return unary(std::cos(x.value_), x, -std::sin(x.value_)); }
  friend Var tanh(const Var& x) {
    const double t = std::tanh(x.value_);
    return unary(t, x, 1.0 - t * t);
  }
  friend Var abs(const Var& x) { return x.value_ < 0.0 ? -x : x; }

  friend bool operator<(const Var& x, const Var& y) { return x.value_ < y.value_; }
  friend bool operator>(const Var& x, const Var& y) { return x.value_ > y.value_; }

 private:
  double value_ = 0.0;
  std::int32_t index_ = -1;
};

inline double value_of(const Var& x) { return x.value(); }

}  // namespace convexnet::ad
