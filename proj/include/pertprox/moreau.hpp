#pragma once

#include <cstdint>

#include "pertprox/oracles.hpp"

namespace pertprox {

// Envelope quantities cached at one base point.
//
// envelope_gradient is always computed as (base_point - prox_point) / lambda
// from the returned prox point; it is never re-solved.
struct MoreauState {
  Vector base_point;
  double lambda = 0.0;
  Vector prox_point;
  double envelope_value = 0.0;
  Vector envelope_gradient;
  double inner_tolerance = 0.0;
};

// Default absolute inner tolerance: 1e-10 * (1 + ||x||).
double default_inner_tolerance(const Vector& x);

// Iteration cap shared by the iterative inner solvers.
inline constexpr int kMaxInnerIterations = 100000;

// Throws ParameterError unless lambda > 0 and lambda * l < 1.
void validate_envelope_parameter(const ProblemOracle& oracle, double lambda);

// prox_{lambda f}(x). Inner solver by oracle type:
//  - NonsmoothObjective with analytic prox: closed form;
//  - NonsmoothObjective otherwise: subgradient descent with step 1/(k (1/lambda - l)),
//    stopping when successive iterates move by at most tol;
//  - CompositeSmoothPlusProx: proximal gradient on the strongly convex subproblem,
//    stopping when its gradient mapping is at most tol;
//  - CompositeOuterInner: prox-linear majorize-minimize iterations, each one a
//    convex linearized subproblem, stopping when the gradient mapping is at most tol.
// A non-positive tol selects default_inner_tolerance(x).
Vector moreau_prox(const ProblemOracle& oracle, double lambda, const Vector& x, double tol = 0.0);

MoreauState moreau_grad(const ProblemOracle& oracle, double lambda, const Vector& x,
                        double tol = 0.0);

// ||closed-form envelope gradient - central difference of envelope values||.
double envelope_grad_fd_check(const ProblemOracle& oracle, double lambda, const Vector& x,
                              double fd_step, double tol = 0.0);

// max ||prox(x) - prox(y)|| / ||x - y|| over seeded pairs drawn uniformly in [-box, box]^d.
double prox_lipschitz_probe(const ProblemOracle& oracle, double lambda, int pairs,
                            std::uint64_t seed, double box = 2.0, double tol = 0.0);

}  // namespace pertprox
