#pragma once

#include <cstdint>

#include "pertprox/schedule.hpp"
#include "pertprox/steps.hpp"

namespace pertprox {

struct SpectralOptions {
  // Non-positive selects default_fd_step(x).
  double fd_step = 0.0;
  double power_tol = 1e-6;
  int max_iters = 500;
  int restarts = 3;
  std::uint64_t seed = 0;
  // Relative forward/backward mismatch above which the Jacobian action is treated
  // as undefined (a kink off the active manifold).
  double asymmetry_threshold = 0.1;
};

struct SpectralEstimate {
  Vector point;
  double lambda_max = 0.0;
  int iterations_used = 0;
  // ||J v - lambda_max v|| for the returned unit direction.
  double residual = 0.0;
  double fd_step = 0.0;
  Vector direction;
  bool converged = false;
  bool asymmetric = false;
};

// (S(x + h v) - S(x - h v)) / (2 h).
Vector jacobian_vector_product(const StepOperator& op, const Vector& x, const Vector& v,
                               double fd_step);

// Power iteration on the finite-difference Jacobian action of S. Prox-point runs on J
// directly (its spectrum is nonnegative); prox-gradient and prox-linear run on J + I and
// subtract the shift. The best converged estimate over the seeded restarts is returned.
SpectralEstimate estimate_lambda_max(const StepOperator& op, const Vector& x,
                                     const SpectralOptions& options = {});

// Dense central-difference Jacobian of S at x.
Matrix step_jacobian(const StepOperator& op, const Vector& x, double fd_step = 0.0);

struct Certificate {
  Vector point;
  double grad_mapping_norm = 0.0;
  double lambda_max_S = 0.0;
  double threshold = 0.0;  // 1 + eta sqrt(rho eps)
  bool is_eps_local_min = false;
  // spectral estimate failed or the Jacobian action looked undefined
  bool indeterminate = false;
  double epsilon = 0.0;
  double rho = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
};

struct CertifyOptions {
  SpectralOptions spectral;
  // Tolerance of the envelope prox.
  InnerTolerance inner_tol;
};

// eps-approximate local minimum: ||grad f_lambda(x)|| <= eps and
// lambda_max(grad S(x)) < 1 + eta sqrt(rho eps). eta is the operator's step size.
Certificate certify_point(const StepOperator& op, const Vector& x, const ScheduleParams& params,
                          const CertifyOptions& options = {});

// Sanity probe for rho: max ||grad S(x) - grad S(y)|| / (eta ||x - y||) over seeded pairs
// drawn from the ball of the given radius around center.
double probe_jacobian_lipschitz(const StepOperator& op, const Vector& center, double radius,
                                int pairs, std::uint64_t seed, double fd_step = 0.0);

}  // namespace pertprox
