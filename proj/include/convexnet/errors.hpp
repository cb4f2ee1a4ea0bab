#pragma once

#include <stdexcept>
#include <string>

namespace convexnet {

/// Input outside the domain of a map (non-finite value, point at the origin).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The sublinear function is not positive where a convex body requires it.
class InvalidBodyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The boundary map has a (numerically) singular Jacobian.
class DegenerateMapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear or least-squares solve failed; carries the condition estimate.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

}  // namespace convexnet
