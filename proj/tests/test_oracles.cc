#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "pertprox/oracles.hpp"
#include "pertprox/problems.hpp"
#include "support.hpp"

namespace pertprox {
namespace {

using testsupport::vec1;

NonsmoothObjective scalar_objective(ScalarFn value, double ell, int d) {
  NonsmoothObjective f;
  f.value = std::move(value);
  f.weak_convexity = ell;
  f.dimension = d;
  return f;
}

TEST(WeakConvexityCheck, ConvexQuadraticHoldsWithoutViolation) {
  const auto f = scalar_objective([](const Vector& x) { return 0.5 * x.squaredNorm(); }, 0.0, 3);
  const ConvexityCheck c = check_weak_convexity(f, 500, 1);
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.worst_violation, 0.0);
}

TEST(WeakConvexityCheck, AbsSquareMinusOneIsTwoWeaklyConvex) {
  const auto f = scalar_objective([](const Vector& x) { return std::abs(x[0] * x[0] - 1.0); }, 2.0, 1);
  EXPECT_TRUE(check_weak_convexity(f, 2000, 7).holds);
  // and the modulus is tight: l = 1 is not enough
  const auto g = scalar_objective([](const Vector& x) { return std::abs(x[0] * x[0] - 1.0); }, 1.0, 1);
  EXPECT_FALSE(check_weak_convexity(g, 2000, 7).holds);
}

TEST(WeakConvexityCheck, NegativeQuadraticNeedsModulusTwo) {
  const auto f = scalar_objective([](const Vector& x) { return -x.squaredNorm(); }, 1.0, 2);
  const ConvexityCheck c = check_weak_convexity(f, 200, 3);
  EXPECT_FALSE(c.holds);
  EXPECT_GT(c.worst_violation, 0.0);
  const auto g = scalar_objective([](const Vector& x) { return -x.squaredNorm(); }, 2.0, 2);
  EXPECT_TRUE(check_weak_convexity(g, 200, 3).holds);
}

TEST(WeakConvexityCheck, RejectsBadArguments) {
  const auto f = scalar_objective([](const Vector& x) { return x.sum(); }, 0.0, 2);
  EXPECT_THROW(check_weak_convexity(f, 99, 0), ParameterError);
  const auto big = scalar_objective([](const Vector& x) { return x.sum(); }, 0.0, 11);
  EXPECT_THROW(check_weak_convexity(big, 100, 0), ParameterError);
}

TEST(WeakConvexityCheck, NonFiniteValueIsAnOracleError) {
  const auto f = scalar_objective(
      [](const Vector& x) { return x[0] > 0.5 ? std::numeric_limits<double>::infinity() : 0.0; }, 0.0, 1);
  EXPECT_THROW(check_weak_convexity(f, 100, 0), OracleEvaluationError);
}

TEST(WeakConvexityCheck, BenchmarksSatisfyTheirDeclaredModulus) {
  for (const std::string name : {"quadratic", "abs", "abs-square-minus-one", "circle-abs"}) {
    const BenchmarkProblem p = make_problem(name);
    EXPECT_TRUE(check_weak_convexity(p.objective, 1000, 11).holds) << name;
  }
}

TEST(FiniteDiffGradient, QuadraticIsExact) {
  const Vector g = finite_diff_gradient([](const Vector& x) { return x[0] * x[0]; }, vec1(3.0), 1e-4);
  EXPECT_NEAR(g[0], 6.0, 1e-6);
}

TEST(FiniteDiffGradient, ConstantGivesZero) {
  const Vector g = finite_diff_gradient([](const Vector&) { return 4.2; }, testsupport::vec2(1, -2));
  EXPECT_EQ(g, Vector::Zero(2));
}

TEST(FiniteDiffGradient, Sine) {
  const Vector g = finite_diff_gradient([](const Vector& x) { return std::sin(x[0]); }, vec1(0.0), 1e-4);
  EXPECT_NEAR(g[0], 1.0, 1e-8);
}

TEST(FiniteDiffGradient, NonFiniteStencilThrows) {
  auto fn = [](const Vector& x) { return x[0] > 0.0 ? std::nan("") : 0.0; };
  EXPECT_THROW(finite_diff_gradient(fn, vec1(0.0), 1e-3), OracleEvaluationError);
}

TEST(FiniteDiffGradient, DefaultStepScalesWithNorm) {
  EXPECT_DOUBLE_EQ(default_fd_step(Vector::Zero(2)), 1e-5);
  EXPECT_DOUBLE_EQ(default_fd_step(testsupport::vec2(3, 4)), 6e-5);
}

TEST(SmoothPlusProx, GradientMatchesFiniteDifferencesAndLipschitzBound) {
  const BenchmarkProblem p = make_problem("lasso-nonconvex");
  const CompositeSmoothPlusProx& spp = *p.smooth_plus_prox;
  for (const Vector& x : testsupport::random_points(50, 2, 2.0, 5)) {
    const Vector fd = finite_diff_gradient(spp.smooth_value, x);
    const Vector g = spp.smooth_gradient(x);
    EXPECT_LE((fd - g).norm(), 1e-5 * (1.0 + g.norm()));
  }
  EXPECT_LE(gradient_lipschitz_ratio(spp.smooth_gradient, 2, 500, 9), spp.gradient_lipschitz * (1 + 1e-9));
}

TEST(OuterInner, JacobiansMatchFiniteDifferences) {
  for (const std::string name : {"circle-abs", "phase-retrieval", "abs-square-minus-one"}) {
    const BenchmarkProblem p = make_problem(name);
    const CompositeOuterInner& oi = *p.outer_inner;
    for (const Vector& x : testsupport::random_points(30, p.dimension(), 1.5, 17)) {
      const Matrix fd = finite_diff_jacobian(oi.inner_map, x);
      const Matrix j = oi.inner_jacobian(x);
      EXPECT_LE((fd - j).norm(), 1e-5 * (1.0 + j.norm())) << name;
    }
  }
}

TEST(OuterInner, CompositeValueMatchesObjective) {
  for (const std::string name : {"circle-abs", "phase-retrieval", "abs-square-minus-one"}) {
    const BenchmarkProblem p = make_problem(name);
    for (const Vector& x : testsupport::random_points(30, p.dimension(), 1.5, 19)) {
      EXPECT_NEAR(p.outer_inner->value(x), p.objective.value(x), 1e-12) << name;
    }
  }
}

TEST(Oracles, EvaluationIsDeterministic) {
  const BenchmarkProblem p = make_problem("phase-retrieval");
  const ProblemOracle o = p.oracle_for(StepKind::ProxLinear);
  for (const Vector& x : testsupport::random_points(20, 2, 2.0, 23)) {
    const double a = evaluate(o, x);
    const double b = evaluate(o, x);
    EXPECT_EQ(a, b);
  }
}

TEST(Oracles, DispatchHelpers) {
  const BenchmarkProblem p = make_problem("circle-abs");
  EXPECT_EQ(dimension(p.oracle_for(StepKind::ProxPoint)), 2);
  EXPECT_EQ(weak_convexity(p.oracle_for(StepKind::ProxPoint)), 2.0);
  EXPECT_EQ(evaluate(p.oracle_for(StepKind::ProxLinear), testsupport::vec2(1, 0)), 1.0);
}

}  // namespace
}  // namespace pertprox
