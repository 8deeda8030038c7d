#pragma once

#include <cstdint>
#include <optional>

namespace pertprox {

enum class ScheduleForm {
  // Unified schedule for all three step operators (eta = 1/L).
  General,
  // Specialized prox-point schedule (eta = lambda < 1/(2 l)).
  ProxPoint,
};

// Parameter bundle of the perturbed loop.
struct ScheduleParams {
  ScheduleForm form = ScheduleForm::General;
  double L = 0.0;
  double lambda = 0.0;  // envelope parameter
  double eta = 0.0;     // step size
  double r = 0.0;       // perturbation radius
  double interval_real = 0.0;
  std::int64_t interval = 0;  // minimum spacing between perturbations, ceil(interval_real)
  double decrease_threshold = 0.0;
  double localization_radius = 0.0;
  double iota = 0.0;
  double total_iterations_real = 0.0;
  std::int64_t total_iterations = 0;  // ceil(total_iterations_real)
  double theta1 = 0.0;
  double theta2 = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double c = 4.0;
  int dimension = 0;
  double envelope_gap = 0.0;

  bool operator==(const ScheduleParams&) const = default;
};

struct ScheduleInputs {
  double epsilon = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double rho = 0.0;
  int dimension = 0;
  // f_lambda(x0) - f_lambda^*, or an upper estimate of it.
  double envelope_gap = 0.0;
  double c = 4.0;
  // Must exceed 3.5 beta + 3 mu; defaults to auto_L(beta, mu).
  std::optional<double> L;
};

// Default L when none is given: 4 (beta + mu), or 1 when both vanish.
double auto_L(double beta, double mu);

// lambda = (L/2 + (beta + 2 mu)/4)^-1; the envelope parameter depends only on L, beta, mu.
double envelope_parameter(double L, double beta, double mu);

// Unified schedule. Throws ParameterError when L <= 3.5 beta + 3 mu, epsilon is outside
// (0, L^2 / rho), delta is outside (0, 1), the gap is not positive, or the log factor
// would not be positive.
ScheduleParams compute_schedule(const ScheduleInputs& in);

struct ProxPointScheduleInputs {
  double epsilon = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  double lambda = 0.0;
  double weak_convexity = 0.0;
  int dimension = 0;
  double envelope_gap = 0.0;
  double c = 4.0;
};

// Prox-point schedule: eta = lambda, r = eps / (400 iota^3), interval = iota / (lambda sqrt(rho eps)).
// Requires lambda < 1/(2 l) and epsilon in (0, 1/(lambda^2 rho)). The gradient-descent
// view sets L = 1/lambda and theta1 = theta2 = 1.
ScheduleParams compute_prox_point_schedule(const ProxPointScheduleInputs& in);

}  // namespace pertprox
