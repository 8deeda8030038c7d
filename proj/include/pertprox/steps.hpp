#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "pertprox/oracles.hpp"

namespace pertprox {

enum class StepKind { ProxPoint, ProxGradient, ProxLinear };

std::string to_string(StepKind kind);
// Accepts "ppa", "pgm", "plm".
StepKind parse_step_kind(const std::string& name);

// Relative inner tolerance: the absolute tolerance used at x is scale * (1 + ||x||).
struct InnerTolerance {
  double scale = 1e-10;
  double at(const Vector& x) const { return scale * (1.0 + x.norm()); }
};

// S(x) = prox_{eta f}(x).
Vector step_ppa(const ProblemOracle& obj, double eta, const Vector& x, double tol = 0.0);
// S(x) = prox_{eta m}(x - eta grad g(x)).
Vector step_pgm(const CompositeSmoothPlusProx& obj, double eta, const Vector& x);
// S(x) = argmin_y h(F(x) + grad F(x)(y - x)) + m(y) + ||y - x||^2 / (2 eta).
Vector step_plm(const CompositeOuterInner& obj, double eta, const Vector& x, double tol = 0.0);

// One of the three proximal updates bound to its oracle and step size. Immutable;
// apply() is safe to call concurrently.
class StepOperator {
 public:
  // The default bound eta <= 0.5 / l keeps the prox subproblem strongly convex.
  static StepOperator prox_point(ProblemOracle oracle, double eta, InnerTolerance tol = {},
                                 bool enforce_half_bound = true);
  static StepOperator prox_gradient(CompositeSmoothPlusProx oracle, double eta,
                                    InnerTolerance tol = {});
  static StepOperator prox_linear(CompositeOuterInner oracle, double eta, InnerTolerance tol = {});

  Vector apply(const Vector& x) const;

  StepKind kind() const { return kind_; }
  double step_size() const { return eta_; }
  const InnerTolerance& inner_tolerance() const { return tol_; }
  int dimension() const;
  // The oracle the step is built from.
  const ProblemOracle& oracle() const { return *oracle_; }
  std::shared_ptr<const ProblemOracle> oracle_handle() const { return oracle_; }

  // Same operator with a different step size (re-validated).
  StepOperator with_step_size(double eta) const;

 private:
  StepOperator(StepKind kind, std::shared_ptr<const ProblemOracle> oracle, double eta,
               InnerTolerance tol)
      : kind_(kind), oracle_(std::move(oracle)), eta_(eta), tol_(tol) {}

  StepKind kind_;
  std::shared_ptr<const ProblemOracle> oracle_;
  double eta_;
  InnerTolerance tol_;
  bool enforce_half_bound_ = true;
};

// Per-algorithm surrogate f_x(y) around a base point, together with the true objective.
struct ModelFunction {
  Vector base_point;
  ScalarFn evaluate;
  ScalarFn objective;
  // |f(y) - f_x(y)| <= (beta / 2) ||y - x||^2
  double model_beta = 0.0;
  // weak convexity modulus of f_x
  double model_mu = 0.0;
};

// Prox-point: f_x = f, beta = 0, mu = l.
// Prox-gradient: f_x(y) = g(x) + <grad g(x), y - x> + m(y), beta = grad-Lipschitz, mu of m.
// Prox-linear: f_x(y) = h(F(x) + grad F(x)(y - x)) + m(y), beta = L_h * L_gradF, mu of m.
ModelFunction make_model(const StepOperator& op, const Vector& x);

// Largest |f(y) - f_x(y)| / (||y - x||^2 / 2) over y uniform in the ball of the given
// radius around the base point.
double model_error_probe(const ModelFunction& model, int samples, double radius,
                         std::uint64_t seed);

}  // namespace pertprox
