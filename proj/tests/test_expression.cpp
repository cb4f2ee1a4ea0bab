#include <gtest/gtest.h>

#include <cmath>

#include "convexnet/autodiff/value_grad.hpp"
#include "convexnet/expression.hpp"

using namespace convexnet;

TEST(Expression, EvaluatesArithmeticAndFunctions) {
  const Eigen::Vector3d y(0.5, -2.0, 3.0);
  EXPECT_DOUBLE_EQ(Expression("1 + 2*3 - 4/2")(y), 5.0);
  EXPECT_DOUBLE_EQ(Expression("-x1^2")(y), -0.25);
  EXPECT_DOUBLE_EQ(Expression("x2^-1")(y), -0.5);
  EXPECT_NEAR(Expression("sin(pi*x) + exp(y) * sqrt(z)")(y), 1.0 + std::exp(-2.0) * std::sqrt(3.0), 1e-15);
  EXPECT_DOUBLE_EQ(Expression("abs(x2) * (x1 + x3)")(y), 7.0);
  EXPECT_EQ(Expression("x3 + x1").max_variable(), 3);
}

TEST(Expression, RejectsMalformedInput) {
  EXPECT_THROW(Expression("1 +"), ExpressionError);
  EXPECT_THROW(Expression("foo(x)"), ExpressionError);
  EXPECT_THROW(Expression("x^y"), ExpressionError);
  EXPECT_THROW(Expression("(x"), ExpressionError);
  EXPECT_THROW(Expression("x5"), ExpressionError);
  EXPECT_THROW(Expression("z")(Eigen::Vector2d(1, 2)), ExpressionError);
}

TEST(Expression, DifferentiableThroughTape) {
  const Expression e("x1*x2 + sin(x2)^2");
  ad::ParameterTape tape(std::vector<double>{0.3, 0.7});
  Vec<ad::Var> y(2);
  y << tape.params()[0], tape.params()[1];
  ad::ValueGrad acc;
  tape.accumulate(e(y), 1.0, acc);
  EXPECT_NEAR(acc.grad[0], 0.7, 1e-15);
  EXPECT_NEAR(acc.grad[1], 0.3 + 2 * std::sin(0.7) * std::cos(0.7), 1e-15);
}
