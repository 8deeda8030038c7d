#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pertprox/driver.hpp"
#include "pertprox/experiment.hpp"
#include "pertprox/moreau.hpp"
#include "pertprox/problems.hpp"
#include "support.hpp"

namespace pertprox {
namespace {

using testsupport::vec1;
using testsupport::vec2;

TEST(CircleAbs, Values) {
  const BenchmarkProblem p = make_circle_abs();
  EXPECT_EQ(p.objective.value(vec2(1, 0)), 1.0);
  EXPECT_EQ(p.objective.value(vec2(-1, 0)), -1.0);
  EXPECT_EQ(p.objective.value(vec2(0, 0)), 1.0);
  EXPECT_EQ(p.objective.weak_convexity, 2.0);
  EXPECT_EQ(p.points_with_label(PointLabel::Saddle).front(), vec2(1, 0));
  EXPECT_EQ(p.points_with_label(PointLabel::LocalMin).front(), vec2(-1, 0));
}

TEST(CircleAbs, LabeledPointsAreFixedForEveryLambdaUpToQuarter) {
  const BenchmarkProblem p = make_circle_abs();
  for (double lambda = 0.01; lambda <= 0.25 + 1e-12; lambda += 0.03) {
    for (const Vector& x : {vec2(1, 0), vec2(-1, 0)}) {
      EXPECT_LE((step_ppa(p.objective, lambda, x) - x).norm(), InnerTolerance{}.at(x)) << lambda;
    }
  }
  EXPECT_LE((step_ppa(p.objective, 0.25, vec2(1, 0)) - vec2(1, 0)).norm(), InnerTolerance{}.at(vec2(1, 0)));
}

TEST(CircleAbs, EnvelopeGradientVanishesOnlyAtLabels) {
  const BenchmarkProblem p = make_circle_abs();
  const double lambda = 0.2;
  int hits = 0;
  for (int i = 0; i <= 60; ++i) {
    for (int j = 0; j <= 60; ++j) {
      const Vector x = vec2(-1.5 + 0.05 * i, -1.5 + 0.05 * j);
      const MoreauState s = moreau_grad(p.objective, lambda, x);
      const bool vanishes = s.envelope_gradient.norm() <= 10 * s.inner_tolerance / lambda;
      bool labeled = false;
      for (const CriticalPoint& cp : p.critical_points) labeled = labeled || (x - cp.point).norm() < 1e-9;
      EXPECT_EQ(vanishes, labeled) << x.transpose() << " " << s.envelope_gradient.norm();
      hits += vanishes;
    }
  }
  EXPECT_EQ(hits, 3);
}

TEST(Benchmarks, CriticalPointsAreFixedPointsOfEveryOperator) {
  for (const std::string& name : problem_names()) {
    const BenchmarkProblem p = make_problem(name);
    for (StepKind kind : {StepKind::ProxPoint, StepKind::ProxGradient, StepKind::ProxLinear}) {
      if (!p.supports(kind)) continue;
      for (double eta : {0.02, 0.05, 0.1}) {
        // the prox-point form needs eta below half the inverse weak-convexity constant
        const double step =
            kind == StepKind::ProxPoint ? std::min(eta, 0.4 / p.objective.weak_convexity) : eta;
        const StepOperator op = p.make_operator(kind, step);
        for (const CriticalPoint& cp : p.critical_points) {
          EXPECT_LE((op.apply(cp.point) - cp.point).norm(), 10 * InnerTolerance{}.at(cp.point))
              << name << " " << to_string(kind) << " eta " << step << " " << cp.point.transpose();
        }
      }
    }
  }
}

TEST(Benchmarks, DeclaredWeakConvexityHolds) {
  for (const std::string& name : problem_names()) {
    const BenchmarkProblem p = make_problem(name);
    EXPECT_TRUE(check_weak_convexity(p.objective, 1000, 3).holds) << name;
  }
}

TEST(Benchmarks, SettingsSatisfyScheduleConstraints) {
  for (const std::string& name : problem_names()) {
    const BenchmarkProblem p = make_problem(name);
    for (const auto& [kind, s] : p.settings) {
      const ModelConstants mc = p.model_constants(kind);
      EXPECT_GT(s.L, 3.5 * mc.beta + 3 * mc.mu) << name << " " << to_string(kind);
      EXPECT_GE(s.rho, 1.0);
      EXPECT_LT(s.epsilon, s.L * s.L / s.rho);
      EXPECT_LE(p.f_lower, p.objective.value(p.x0));
    }
  }
}

TEST(Lasso, ZeroCurvatureZeroDataHasMinimumAtOrigin) {
  const BenchmarkProblem p = make_lasso_nonconvex(Matrix::Identity(2, 2), Vector::Zero(2), 0.3, 0.0);
  ASSERT_EQ(p.critical_points.size(), 1u);
  EXPECT_EQ(p.critical_points.front().point, Vector::Zero(2));
  EXPECT_EQ(p.f_lower, 0.0);
}

TEST(Lasso, OneDimensionalPgmReachesSoftThresholdSolution) {
  const BenchmarkProblem p = make_lasso_nonconvex(Matrix::Ones(1, 1), vec1(2.0), 1.0, 0.0);
  const StepOperator op = p.make_operator(StepKind::ProxGradient, 0.5);
  Vector x = vec1(0.0);
  for (int i = 0; i < 200; ++i) x = op.apply(x);
  EXPECT_NEAR(x[0], 1.0, 1e-12);
  EXPECT_NEAR(p.critical_points.front().point[0], 1.0, 1e-15);
}

TEST(Lasso, NoL1TermMakesPgmGradientDescent) {
  const Matrix a = (Matrix(2, 2) << 1.0, 0.3, 0.0, 2.0).finished();
  const BenchmarkProblem p = make_lasso_nonconvex(a, vec2(1, -1), 0.0, 0.0);
  const StepOperator op = p.make_operator(StepKind::ProxGradient, 0.1);
  const Vector x = vec2(0.4, 0.7);
  const Vector gd = x - 0.1 * a.transpose() * (a * x - vec2(1, -1));
  EXPECT_LE((op.apply(x) - gd).norm(), 1e-15);
}

TEST(Lasso, DefaultMinimumFromRegistry) {
  const BenchmarkProblem p = make_problem("lasso-nonconvex");
  const Vector m = p.critical_points.front().point;
  // soft((2.4, 0.5), 0.4) / (1.44 - 0.5, 1 - 0.5)
  EXPECT_NEAR(m[0], 2.0 / 0.94, 1e-14);
  EXPECT_NEAR(m[1], 0.2, 1e-14);
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) EXPECT_LE(p.objective.value(m), p.objective.value(m + vec2(0.01 * i, 0.01 * j)));
  }
  EXPECT_LE(p.f_lower, p.objective.value(m));
}

TEST(Lasso, RejectsMismatchedDimensions) {
  EXPECT_THROW(make_lasso_nonconvex(Matrix::Identity(2, 2), Vector::Zero(3), 0.1, 0.0), ParameterError);
  EXPECT_THROW(make_lasso_nonconvex(Matrix::Identity(2, 2), Vector::Zero(2), -0.1, 0.0), ParameterError);
}

TEST(PhaseRetrieval, ZeroAtTruthAndItsNegation) {
  const BenchmarkProblem p = make_problem("phase-retrieval");
  const Vector truth = vec2(1.0, 0.5);
  EXPECT_EQ(p.objective.value(truth), 0.0);
  EXPECT_EQ(p.objective.value(-truth), 0.0);
}

TEST(PhaseRetrieval, ValueAtOriginIsMeanMeasurement) {
  const BenchmarkProblem p = make_robust_phase_retrieval(3, 5, Vector::Ones(3), 11);
  const Vector f = p.outer_inner->inner_map(Vector::Ones(3));
  EXPECT_NEAR(p.objective.value(Vector::Zero(3)), f.mean(), 1e-14);
}

TEST(PhaseRetrieval, SignSymmetryIsBitExact) {
  const BenchmarkProblem p = make_problem("phase-retrieval");
  for (const Vector& x : testsupport::random_points(200, 2, 2.0, 13)) {
    EXPECT_EQ(p.objective.value(x), p.objective.value(-x));
  }
}

TEST(PhaseRetrieval, DeclaredConstants) {
  const BenchmarkProblem p = make_problem("phase-retrieval");
  EXPECT_EQ(p.outer_inner->outer_lipschitz, 1.0);
  EXPECT_GT(p.outer_inner->jacobian_lipschitz, 0.0);
  EXPECT_EQ(p.model_constants(StepKind::ProxLinear).beta, p.outer_inner->model_beta());
}

TEST(PhaseRetrieval, ProxLinearFromNearOriginReachesTruth) {
  ExperimentConfig cfg;
  cfg.problem = "phase-retrieval";
  cfg.algorithm = StepKind::ProxLinear;
  cfg.overrides.total_iterations = 2000;
  PreparedExperiment prep = prepare_experiment(cfg);
  const Vector truth = vec2(1.0, 0.5);
  int reached = 0;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 0.02);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Vector x0 = vec2(n(rng), n(rng));
    const Trajectory traj = run(prep.op, x0, prep.params, seed);
    const Vector xf = traj.iterates.back().x;
    reached += std::min((xf - truth).norm(), (xf + truth).norm()) <= 1e-3;
  }
  EXPECT_GT(reached, 10);
}

TEST(Registry, UnknownNamesAndParameters) {
  EXPECT_THROW(make_problem("rosenbrock"), ParameterError);
  EXPECT_THROW(make_problem("circle-abs", {{"d", {3}}}), ParameterError);
  EXPECT_THROW(make_problem("quadratic", {{"d", {1.5}}}), ParameterError);
  EXPECT_THROW(make_problem("quadratic", {{"d", {1, 2}}}), ParameterError);
  EXPECT_THROW(make_problem("phase-retrieval", {{"d", {11}}}), ParameterError);
  EXPECT_THROW(make_problem("phase-retrieval", {{"x_true", {1, 2, 3}}}), ParameterError);
  EXPECT_EQ(make_problem("quadratic", {{"d", {4}}}).dimension(), 4);
  EXPECT_EQ(make_problem("lasso-nonconvex", {{"d", {3}}}).dimension(), 3);
}

TEST(Registry, EveryNameBuilds) {
  for (const std::string& name : problem_names()) {
    const BenchmarkProblem p = make_problem(name);
    EXPECT_EQ(p.name, name);
    EXPECT_EQ(p.x0.size(), p.dimension());
    EXPECT_FALSE(p.critical_points.empty()) << name;
  }
}

TEST(Labels, Names) {
  EXPECT_EQ(to_string(PointLabel::Saddle), "saddle");
  EXPECT_EQ(to_string(PointLabel::LocalMin), "local_min");
  EXPECT_EQ(to_string(PointLabel::LocalMax), "local_max");
}

TEST(RadialAbsProx, ZeroInputStaysAtOriginOrMovesToCircle) {
  // at z = 0 the subproblem is radially symmetric; small lambda keeps the origin
  EXPECT_EQ(radial_abs_prox(vec2(0, 0), 0.1), vec2(0, 0));
}

}  // namespace
}  // namespace pertprox
