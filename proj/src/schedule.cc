#include "pertprox/schedule.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pertprox/types.hpp"

namespace pertprox {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

std::int64_t ceil_count(double v) {
  if (!(v < 9.0e18)) throw ParameterError("schedule count overflows a 64-bit integer");
  return static_cast<std::int64_t>(std::ceil(v));
}

void validate_common(double epsilon, double delta, double rho, int dimension, double gap, double c) {
  require(epsilon > 0.0, "epsilon must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(rho > 0.0, "rho must be positive");
  require(dimension >= 1, "dimension must be at least 1");
  require(gap > 0.0 && std::isfinite(gap), "envelope gap must be positive and finite");
  require(c > 0.0, "absolute constant c must be positive");
}

// Fills r, intervals, thresholds and T from iota and the theta ratio.
void fill_counts(ScheduleParams& p, double theta_ratio, double interval_scale) {
  const double eps = p.epsilon;
  const double iota3 = p.iota * p.iota * p.iota;
  p.r = theta_ratio * eps / (400.0 * iota3);
  p.interval_real = interval_scale / std::sqrt(p.rho * eps) * p.iota;
  p.interval = ceil_count(p.interval_real);
  p.decrease_threshold = theta_ratio * (1.0 / (50.0 * iota3)) * std::sqrt(eps * eps * eps / p.rho);
  p.localization_radius = 1.0 / (4.0 * p.iota) * std::sqrt(eps / p.rho);
  const double escape_bound = p.envelope_gap / (p.decrease_threshold / (2.0 * p.interval_real));
  const double gradient_bound = p.envelope_gap / (p.theta2 * p.eta * eps * eps / 2.0);
  p.total_iterations_real = 4.0 * std::max(escape_bound, gradient_bound);
  p.total_iterations = ceil_count(p.total_iterations_real);
}

}  // namespace

double auto_L(double beta, double mu) {
  const double l = 4.0 * (beta + mu);
  return l > 0.0 ? l : 1.0;
}

double envelope_parameter(double L, double beta, double mu) {
  return 1.0 / (0.5 * L + 0.25 * (beta + 2.0 * mu));
}

ScheduleParams compute_schedule(const ScheduleInputs& in) {
  validate_common(in.epsilon, in.delta, in.rho, in.dimension, in.envelope_gap, in.c);
  require(in.beta >= 0.0 && in.mu >= 0.0, "beta and mu must be nonnegative");
  const double L = in.L.value_or(auto_L(in.beta, in.mu));
  require(L > 3.5 * in.beta + 3.0 * in.mu,
          "L must exceed 3.5 beta + 3 mu (L=" + std::to_string(L) + ")");
  require(in.epsilon < L * L / in.rho, "epsilon must lie in (0, L^2 / rho)");

  ScheduleParams p;
  p.form = ScheduleForm::General;
  p.L = L;
  p.epsilon = in.epsilon;
  p.delta = in.delta;
  p.rho = in.rho;
  p.beta = in.beta;
  p.mu = in.mu;
  p.c = in.c;
  p.dimension = in.dimension;
  p.envelope_gap = in.envelope_gap;

  p.lambda = envelope_parameter(L, in.beta, in.mu);
  const double inv = 1.0 / p.lambda;
  const double beta = in.beta;
  const double mu = in.mu;
  p.theta1 = (L - inv + beta) * p.lambda * p.lambda * L * L / (L - inv - beta);
  p.theta2 = (inv - beta - mu) * L * p.lambda / (inv + L - beta - 2.0 * mu);
  require(p.theta1 > 0.0 && p.theta2 > 0.0, "schedule coefficients are not positive");
  p.eta = 1.0 / L;

  const double log_arg = in.dimension * L * in.envelope_gap / (in.rho * in.epsilon * in.delta);
  p.iota = in.c * std::log(log_arg);
  require(p.iota > 0.0, "log factor must be positive; d L gap / (rho eps delta) must exceed 1");

  fill_counts(p, p.theta2 / p.theta1, L);
  return p;
}

ScheduleParams compute_prox_point_schedule(const ProxPointScheduleInputs& in) {
  validate_common(in.epsilon, in.delta, in.rho, in.dimension, in.envelope_gap, in.c);
  require(in.lambda > 0.0, "lambda must be positive");
  require(in.weak_convexity >= 0.0, "weak convexity modulus must be nonnegative");
  require(in.weak_convexity == 0.0 || in.lambda < 0.5 / in.weak_convexity,
          "prox-point schedule needs lambda < 1/(2 l)");
  require(in.epsilon < 1.0 / (in.lambda * in.lambda * in.rho),
          "epsilon must lie in (0, 1 / (lambda^2 rho))");

  ScheduleParams p;
  p.form = ScheduleForm::ProxPoint;
  p.lambda = in.lambda;
  p.eta = in.lambda;
  p.L = 1.0 / in.lambda;
  p.theta1 = 1.0;
  p.theta2 = 1.0;
  p.epsilon = in.epsilon;
  p.delta = in.delta;
  p.rho = in.rho;
  p.beta = 0.0;
  p.mu = in.weak_convexity;
  p.c = in.c;
  p.dimension = in.dimension;
  p.envelope_gap = in.envelope_gap;

  const double log_arg =
      in.dimension * in.envelope_gap / (in.lambda * in.rho * in.epsilon * in.delta);
  p.iota = in.c * std::log(log_arg);
  require(p.iota > 0.0, "log factor must be positive; d gap / (lambda rho eps delta) must exceed 1");

  fill_counts(p, 1.0, 1.0 / in.lambda);
  return p;
}

}  // namespace pertprox
