#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>

#include "pertprox/types.hpp"

namespace pertprox {

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;
using MatrixFn = std::function<Matrix(const Vector&)>;
// (point, step) -> prox_{step * f}(point)
using ProxFn = std::function<Vector(const Vector&, double)>;

// A nonsmooth, weakly convex function f: f + (l/2)||.||^2 is convex.
struct NonsmoothObjective {
  ScalarFn value;
  double weak_convexity = 0.0;
  int dimension = 0;
  // Closed-form proximal map, when one is known.
  ProxFn analytic_prox;
  // Any element of the (regular) subdifferential; only used by the subgradient
  // fallback of the Moreau inner solver. Falls back to finite differences.
  VectorFn subgradient;

  bool has_analytic_prox() const { return static_cast<bool>(analytic_prox); }
};

// f = g + m with g smooth (beta-Lipschitz gradient) and m prox-friendly, mu-weakly convex.
// An absent prox term means m = 0.
struct CompositeSmoothPlusProx {
  ScalarFn smooth_value;
  VectorFn smooth_gradient;
  double gradient_lipschitz = 0.0;
  std::optional<NonsmoothObjective> prox_term;
  int dimension = 0;
  // Weak convexity modulus of the sum; defaults to beta + mu when left negative.
  double declared_weak_convexity = -1.0;

  double prox_modulus() const { return prox_term ? prox_term->weak_convexity : 0.0; }
  double weak_convexity() const {
    return declared_weak_convexity >= 0.0 ? declared_weak_convexity
                                          : gradient_lipschitz + prox_modulus();
  }
  double value(const Vector& x) const;
};

// Convex outer function h with an analytic proximal map.
struct ConvexOuter {
  ScalarFn value;
  ProxFn prox;
  // prox of the convex conjugate h*. Optional; without it the Moreau identity is used,
  // which loses precision when the dual step is large.
  ProxFn conjugate_prox;
  int dimension = 0;
};

// f = h(F(x)) + m(x) with F smooth and h convex.
struct CompositeOuterInner {
  VectorFn inner_map;
  MatrixFn inner_jacobian;
  ConvexOuter outer;
  std::optional<NonsmoothObjective> prox_term;
  double outer_lipschitz = 0.0;
  double jacobian_lipschitz = 0.0;
  int dimension = 0;
  double declared_weak_convexity = -1.0;

  // Quadratic accuracy constant of the linearized model: L_h * L_gradF.
  double model_beta() const { return outer_lipschitz * jacobian_lipschitz; }
  double prox_modulus() const { return prox_term ? prox_term->weak_convexity : 0.0; }
  double weak_convexity() const {
    return declared_weak_convexity >= 0.0 ? declared_weak_convexity
                                          : model_beta() + prox_modulus();
  }
  double value(const Vector& x) const;
};

using ProblemOracle = std::variant<NonsmoothObjective, CompositeSmoothPlusProx, CompositeOuterInner>;

double evaluate(const ProblemOracle& oracle, const Vector& x);
double weak_convexity(const ProblemOracle& oracle);
int dimension(const ProblemOracle& oracle);

// Evaluates fn(x) and throws OracleEvaluationError on a non-finite result.
double checked_value(const ScalarFn& fn, const Vector& x);

// Default finite-difference step: 1e-5 * (1 + ||x||).
double default_fd_step(const Vector& x);

// Central-difference gradient. A non-positive step selects default_fd_step(x).
Vector finite_diff_gradient(const ScalarFn& fn, const Vector& x, double step = 0.0);

// Central-difference Jacobian of a vector map, one column per coordinate.
Matrix finite_diff_jacobian(const VectorFn& fn, const Vector& x, double step = 0.0);

struct ConvexityCheck {
  bool holds = true;
  // Largest observed excess of the secant inequality, clamped at zero.
  double worst_violation = 0.0;
};

// Samples triples (x, y, theta) with x, y uniform in [-box, box]^d and checks the
// secant inequality of f + (l/2)||.||^2 with 1e-8 absolute slack.
ConvexityCheck check_weak_convexity(const NonsmoothObjective& obj, int samples, std::uint64_t seed,
                                    double box = 2.0);

// max ||grad(x) - grad(y)|| / ||x - y|| over seeded pairs in [-box, box]^d.
double gradient_lipschitz_ratio(const VectorFn& gradient, int dimension, int samples,
                                std::uint64_t seed, double box = 2.0);

}  // namespace pertprox
