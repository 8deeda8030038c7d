#include "pertprox/certify.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <limits>
#include <random>

#include <Eigen/SVD>

#include "pertprox/moreau.hpp"
#include "pertprox/sampling.hpp"

namespace pertprox {

Vector jacobian_vector_product(const StepOperator& op, const Vector& x, const Vector& v,
                               double fd_step) {
  if (!(fd_step > 0.0)) throw ParameterError("finite-difference step must be positive");
  return (op.apply(x + fd_step * v) - op.apply(x - fd_step * v)) / (2.0 * fd_step);
}

namespace {

Vector random_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

struct PowerRun {
  double value = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Vector direction;
  bool converged = false;
};

PowerRun power_iteration(const StepOperator& op, const Vector& x, double h, double shift,
                         const SpectralOptions& opt, std::mt19937_64& rng) {
  PowerRun run;
  Vector v = random_unit(static_cast<int>(x.size()), rng);
  for (int it = 1; it <= opt.max_iters; ++it) {
    const Vector jv = jacobian_vector_product(op, x, v, h);
    const double rayleigh = v.dot(jv);
    run.value = rayleigh;
    run.residual = (jv - rayleigh * v).norm();
    run.iterations = it;
    run.direction = v;
    if (run.residual <= opt.power_tol) {
      run.converged = true;
      return run;
    }
    const Vector next = jv + shift * v;
    const double n = next.norm();
    if (n == 0.0) break;
    v = next / n;
  }
  return run;
}

// Forward and backward one-sided actions of S along v.
std::pair<Vector, Vector> one_sided_actions(const StepOperator& op, const Vector& x,
                                            const Vector& v, double h) {
  const Vector s0 = op.apply(x);
  return {(op.apply(x + h * v) - s0) / h, (s0 - op.apply(x - h * v)) / h};
}

// The mismatch is measured against max(||action||, 1): eigenvalues are compared with a
// threshold near one, so a mismatch far below one cannot flip the decision.
bool asymmetric_action(const Vector& forward, const Vector& backward, double threshold) {
  const double scale = std::max({forward.norm(), backward.norm(), 1.0});
  return (forward - backward).norm() > threshold * scale;
}

}  // namespace

SpectralEstimate estimate_lambda_max(const StepOperator& op, const Vector& x,
                                     const SpectralOptions& options) {
  if (options.max_iters < 1) throw ParameterError("power iteration needs max_iters >= 1");
  if (options.restarts < 1) throw ParameterError("power iteration needs at least one restart");
  const double h = options.fd_step > 0.0 ? options.fd_step : default_fd_step(x);
  const double shift = op.kind() == StepKind::ProxPoint ? 0.0 : 1.0;

  std::mt19937_64 rng(options.seed);
  PowerRun best;
  bool have_converged = false;
  int total_iterations = 0;
  for (int k = 0; k < options.restarts; ++k) {
    PowerRun run = power_iteration(op, x, h, shift, options, rng);
    total_iterations += run.iterations;
    if (!run.converged && run.direction.size() == x.size()) {
      // a stalled run still counts when its residual is within the finite-difference
      // discretization error along its direction (e.g. a nearly zero action at a kink)
      const auto [fwd, bwd] = one_sided_actions(op, x, run.direction, h);
      run.converged = run.residual <= 0.5 * (fwd - bwd).norm();
    }
    if (run.converged) {
      if (!have_converged || run.value > best.value) best = run;
      have_converged = true;
    } else if (!have_converged && run.residual < best.residual) {
      best = run;
    }
  }

  SpectralEstimate est;
  est.point = x;
  est.lambda_max = best.value;
  est.residual = best.residual;
  est.iterations_used = total_iterations;
  est.fd_step = h;
  est.direction = best.direction;
  est.converged = have_converged;
  if (best.direction.size() == x.size()) {
    const auto [fwd, bwd] = one_sided_actions(op, x, best.direction, h);
    est.asymmetric = asymmetric_action(fwd, bwd, options.asymmetry_threshold);
  }
  return est;
}

Matrix step_jacobian(const StepOperator& op, const Vector& x, double fd_step) {
  return finite_diff_jacobian([&op](const Vector& z) { return op.apply(z); }, x, fd_step);
}

Certificate certify_point(const StepOperator& op, const Vector& x, const ScheduleParams& params,
                          const CertifyOptions& options) {
  if (!x.allFinite()) throw ParameterError("certified point must be finite");
  Certificate cert;
  cert.point = x;
  cert.epsilon = params.epsilon;
  cert.rho = params.rho;
  cert.eta = op.step_size();
  cert.lambda = params.lambda;
  cert.threshold = 1.0 + cert.eta * std::sqrt(params.rho * params.epsilon);

  const MoreauState state = moreau_grad(op.oracle(), params.lambda, x, options.inner_tol.at(x));
  cert.grad_mapping_norm = state.envelope_gradient.norm();

  const SpectralEstimate est = estimate_lambda_max(op, x, options.spectral);
  cert.lambda_max_S = est.lambda_max;
  cert.indeterminate = !est.converged || est.asymmetric;
  cert.is_eps_local_min = !cert.indeterminate && cert.grad_mapping_norm <= params.epsilon &&
                          cert.lambda_max_S < cert.threshold;
  return cert;
}

double probe_jacobian_lipschitz(const StepOperator& op, const Vector& center, double radius,
                                int pairs, std::uint64_t seed, double fd_step) {
  std::mt19937_64 rng(seed);
  const int d = static_cast<int>(center.size());
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vector a = center + sample_ball(d, radius, rng);
    const Vector b = center + sample_ball(d, radius, rng);
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;
    const Matrix ja = step_jacobian(op, a, fd_step);
    const Matrix jb = step_jacobian(op, b, fd_step);
    const double diff = Eigen::JacobiSVD<Matrix>(ja - jb).singularValues()(0);
    worst = std::max(worst, diff / (op.step_size() * dist));
  }
  return worst;
}

}  // namespace pertprox
