#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pertprox/oracles.hpp"
#include "pertprox/steps.hpp"

namespace pertprox {

enum class PointLabel { Saddle, LocalMin, LocalMax };
std::string to_string(PointLabel label);

struct CriticalPoint {
  Vector point;
  PointLabel label = PointLabel::LocalMin;
};

// Declared per-algorithm constants used to build a schedule.
struct AlgorithmSettings {
  double L = 0.0;
  // Lipschitz constant of grad S (scaled by eta), measured by probe_jacobian_lipschitz
  // within 0.05 of the critical points where S is C^1, rounded up, at least 1.
  double rho = 1.0;
  // Recommended epsilon: small enough that 1 + eta sqrt(rho eps) separates the labels.
  double epsilon = 0.1;
};

// Model constants of one algorithm on one problem: quadratic accuracy beta and the
// weak convexity mu of the model.
struct ModelConstants {
  double beta = 0.0;
  double mu = 0.0;
};

// A landscape with known structure. Immutable once built.
struct BenchmarkProblem {
  std::string name;
  NonsmoothObjective objective;
  std::optional<CompositeSmoothPlusProx> smooth_plus_prox;
  std::optional<CompositeOuterInner> outer_inner;
  std::vector<CriticalPoint> critical_points;
  std::map<StepKind, AlgorithmSettings> settings;

  // Recommended schedule inputs.
  Vector x0;
  double delta = 0.1;
  double c = 4.0;
  // Lower bound on f (hence on f_lambda), used to size the envelope gap.
  double f_lower = 0.0;

  int dimension() const { return objective.dimension; }
  bool supports(StepKind kind) const;
  // Oracle the step operator (and its envelope) is built from.
  ProblemOracle oracle_for(StepKind kind) const;
  ModelConstants model_constants(StepKind kind) const;
  StepOperator make_operator(StepKind kind, double eta, InnerTolerance tol = {}) const;
  std::vector<Vector> points_with_label(PointLabel label) const;
};

// prox of |‖.‖^2 - 1| with parameter lambda, via the radial reduction: the minimizer is
// s * z / ||z|| where s is the best of the closed-form stationary points of each smooth
// piece, the kink s = 1, and s = 0.
Vector radial_abs_prox(const Vector& z, double lambda);

// f(x) = 0.5 ||x||^2.
BenchmarkProblem make_quadratic(int d);
// f(x) = ||x||_1.
BenchmarkProblem make_abs(int d);
// f(x) = |x^2 - 1| in one dimension, l = 2.
BenchmarkProblem make_abs_square_minus_one();
// g(x, y) = |x^2 + y^2 - 1| + x: saddle (1, 0), global minimum (-1, 0), local maximum
// (1/2, 0). l = 2 is global for |.|^2 - 1|.
BenchmarkProblem make_circle_abs();
// g(x) = 0.5 ||Ax - b||^2 - (curvature/2) ||x||^2, m = tau ||x||_1.
BenchmarkProblem make_lasso_nonconvex(const Matrix& a, const Vector& b, double tau,
                                      double curvature);
// f(x) = (1/m) sum_i |(a_i^T x)^2 - b_i|, b_i = (a_i^T x_true)^2, a_i seeded standard Gaussian.
BenchmarkProblem make_robust_phase_retrieval(int d, int num_measurements, const Vector& x_true,
                                             std::uint64_t seed);

// Named numeric parameters for the registry (scalars are one-element lists).
using ProblemParams = std::map<std::string, std::vector<double>>;

std::vector<std::string> problem_names();
// Throws ParameterError on an unknown name or malformed parameters.
BenchmarkProblem make_problem(const std::string& name, const ProblemParams& params = {});

}  // namespace pertprox
