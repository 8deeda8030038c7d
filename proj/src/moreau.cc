#include "pertprox/moreau.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "pertprox/subproblem.hpp"

namespace pertprox {

double default_inner_tolerance(const Vector& x) { return 1e-10 * (1.0 + x.norm()); }

void validate_envelope_parameter(const ProblemOracle& oracle, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("envelope parameter lambda must be positive and finite");
  }
  const double l = weak_convexity(oracle);
  if (l > 0.0 && lambda * l >= 1.0) {
    throw ParameterError("envelope parameter lambda must satisfy lambda < 1/l (lambda=" +
                         std::to_string(lambda) + ", l=" + std::to_string(l) + ")");
  }
}

namespace {

Vector prox_subgradient(const NonsmoothObjective& obj, double lambda, const Vector& x, double tol) {
  const double sigma = 1.0 / lambda - obj.weak_convexity;
  auto subproblem = [&](const Vector& y) {
    return checked_value(obj.value, y) + 0.5 / lambda * (y - x).squaredNorm();
  };
  auto subgradient = [&](const Vector& y) -> Vector {
    Vector s = obj.subgradient ? obj.subgradient(y) : finite_diff_gradient(obj.value, y);
    return s + (y - x) / lambda;
  };

  Vector y = x;
  Vector best = y;
  double best_value = subproblem(y);
  double last_move = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kMaxInnerIterations; ++k) {
    const Vector next = y - (1.0 / (k * sigma)) * subgradient(y);
    if (!next.allFinite()) throw OracleEvaluationError("subgradient oracle returned a non-finite value");
    last_move = (next - y).norm();
    y = next;
    const double v = subproblem(y);
    if (v < best_value) {
      best_value = v;
      best = y;
    }
    if (last_move <= tol) return best;
  }
  throw ConvergenceError("subgradient inner solver hit its iteration cap", best, last_move);
}

Vector prox_smooth_plus_prox(const CompositeSmoothPlusProx& obj, double lambda, const Vector& x,
                             double tol) {
  const double t = 1.0 / (obj.gradient_lipschitz + 1.0 / lambda);
  Vector y = x;
  double mapping = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kMaxInnerIterations; ++k) {
    const Vector grad = obj.smooth_gradient(y) + (y - x) / lambda;
    if (!grad.allFinite()) throw OracleEvaluationError("smooth gradient returned a non-finite value");
    Vector next = y - t * grad;
    if (obj.prox_term) next = obj.prox_term->analytic_prox(next, t);
    mapping = (next - y).norm() / t;
    y = std::move(next);
    if (mapping <= tol) return y;
  }
  throw ConvergenceError("proximal-gradient inner solver hit its iteration cap", y, mapping);
}

Vector prox_outer_inner(const CompositeOuterInner& obj, double lambda, const Vector& x, double tol) {
  const double beta = obj.model_beta();
  const double curvature = 1.0 / lambda + beta;
  const double step = 1.0 / curvature;

  LinearizedSubproblem sub;
  sub.outer = &obj.outer;
  sub.prox_term = obj.prox_term ? &*obj.prox_term : nullptr;
  sub.step = step;
  SubproblemOptions opt;
  // inner error below a tenth of the outer tolerance; floored at what doubles resolve
  opt.tolerance = std::max(0.1 * tol * step,
                           16.0 * std::numeric_limits<double>::epsilon() * (1.0 + x.norm()));

  Vector y = x;
  double mapping = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kMaxInnerIterations; ++k) {
    sub.jacobian = obj.inner_jacobian(y);
    sub.offset = obj.inner_map(y) - sub.jacobian * y;
    // (1/2 lambda)||. - x||^2 + (beta/2)||. - y||^2 collapsed into one quadratic
    sub.center = (x / lambda + beta * y) / curvature;
    Vector next = solve_linearized_subproblem(sub, opt).point;
    mapping = (next - y).norm() / step;
    y = std::move(next);
    // an affine inner map makes the model exact: one solve suffices
    if (mapping <= tol || beta == 0.0) return y;
  }
  throw ConvergenceError("prox-linear inner solver hit its iteration cap", y, mapping);
}

}  // namespace

Vector moreau_prox(const ProblemOracle& oracle, double lambda, const Vector& x, double tol) {
  validate_envelope_parameter(oracle, lambda);
  if (x.size() != dimension(oracle)) throw ParameterError("point dimension does not match oracle");
  if (!x.allFinite()) throw ParameterError("prox base point must be finite");
  if (tol <= 0.0) tol = default_inner_tolerance(x);

  return std::visit(
      [&](const auto& o) -> Vector {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, NonsmoothObjective>) {
          if (o.has_analytic_prox()) return o.analytic_prox(x, lambda);
          return prox_subgradient(o, lambda, x, tol);
        } else if constexpr (std::is_same_v<T, CompositeSmoothPlusProx>) {
          return prox_smooth_plus_prox(o, lambda, x, tol);
        } else {
          return prox_outer_inner(o, lambda, x, tol);
        }
      },
      oracle);
}

MoreauState moreau_grad(const ProblemOracle& oracle, double lambda, const Vector& x, double tol) {
  if (tol <= 0.0) tol = default_inner_tolerance(x);
  MoreauState state;
  state.base_point = x;
  state.lambda = lambda;
  state.inner_tolerance = tol;
  state.prox_point = moreau_prox(oracle, lambda, x, tol);
  const double fp = evaluate(oracle, state.prox_point);
  if (!std::isfinite(fp)) throw OracleEvaluationError("objective is not finite at the prox point");
  state.envelope_value = fp + 0.5 / lambda * (state.prox_point - x).squaredNorm();
  state.envelope_gradient = (x - state.prox_point) / lambda;
  return state;
}

double envelope_grad_fd_check(const ProblemOracle& oracle, double lambda, const Vector& x,
                              double fd_step, double tol) {
  const MoreauState center = moreau_grad(oracle, lambda, x, tol);
  const Vector fd = finite_diff_gradient(
      [&](const Vector& z) { return moreau_grad(oracle, lambda, z, tol).envelope_value; }, x,
      fd_step);
  return (center.envelope_gradient - fd).norm();
}

double prox_lipschitz_probe(const ProblemOracle& oracle, double lambda, int pairs,
                            std::uint64_t seed, double box, double tol) {
  const int d = dimension(oracle);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Vector x(d), y(d);
    for (int i = 0; i < d; ++i) x[i] = unif(rng);
    for (int i = 0; i < d; ++i) y[i] = unif(rng);
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    const Vector px = moreau_prox(oracle, lambda, x, tol);
    const Vector py = moreau_prox(oracle, lambda, y, tol);
    worst = std::max(worst, (px - py).norm() / dist);
  }
  return worst;
}

}  // namespace pertprox
