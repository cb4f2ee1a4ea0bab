#pragma once

// Lets Eigen containers hold the differentiable scalar types.

#include <Eigen/Core>

#include "convexnet/autodiff/jet.hpp"
#include "convexnet/autodiff/var.hpp"

namespace Eigen {

template <>
struct NumTraits<convexnet::ad::Var> : GenericNumTraits<double> {
  using Real = convexnet::ad::Var;
  using NonInteger = convexnet::ad::Var;
  using Nested = convexnet::ad::Var;
  using Literal = convexnet::ad::Var;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 2,
    MulCost = 2,
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <class T, int N>
struct NumTraits<convexnet::ad::Jet<T, N>> : GenericNumTraits<double> {
  using Real = convexnet::ad::Jet<T, N>;
  using NonInteger = Real;
  using Nested = Real;
  using Literal = Real;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 1 + N,
    MulCost = 1 + 2 * N,
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <class BinaryOp>
struct ScalarBinaryOpTraits<convexnet::ad::Var, double, BinaryOp> {
  using ReturnType = convexnet::ad::Var;
};
template <class BinaryOp>
struct ScalarBinaryOpTraits<double, convexnet::ad::Var, BinaryOp> {
  using ReturnType = convexnet::ad::Var;
};
template <class T, int N, class BinaryOp>
struct ScalarBinaryOpTraits<convexnet::ad::Jet<T, N>, double, BinaryOp> {
  using ReturnType = convexnet::ad::Jet<T, N>;
};
template <class T, int N, class BinaryOp>
struct ScalarBinaryOpTraits<double, convexnet::ad::Jet<T, N>, BinaryOp> {
  using ReturnType = convexnet::ad::Jet<T, N>;
};

}  // namespace Eigen
