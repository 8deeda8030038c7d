#include "pertprox/steps.hpp"

#include <cmath>
#include <random>

#include "pertprox/moreau.hpp"
#include "pertprox/sampling.hpp"
#include "pertprox/subproblem.hpp"

namespace pertprox {

std::string to_string(StepKind kind) {
  switch (kind) {
    case StepKind::ProxPoint:
      return "ppa";
    case StepKind::ProxGradient:
      return "pgm";
    case StepKind::ProxLinear:
      return "plm";
  }
  return "unknown";
}

StepKind parse_step_kind(const std::string& name) {
  if (name == "ppa") return StepKind::ProxPoint;
  if (name == "pgm") return StepKind::ProxGradient;
  if (name == "plm") return StepKind::ProxLinear;
  throw ParameterError("unknown algorithm '" + name + "' (expected ppa, pgm or plm)");
}

namespace {

void check_eta_against_mu(double eta, double mu) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ParameterError("step size eta must be positive");
  if (mu > 0.0 && eta * mu >= 1.0) {
    throw ParameterError("step size eta must satisfy eta < 1/mu (eta=" + std::to_string(eta) +
                         ", mu=" + std::to_string(mu) + ")");
  }
}

}  // namespace

Vector step_ppa(const ProblemOracle& obj, double eta, const Vector& x, double tol) {
  return moreau_prox(obj, eta, x, tol);
}

Vector step_pgm(const CompositeSmoothPlusProx& obj, double eta, const Vector& x) {
  check_eta_against_mu(eta, obj.prox_modulus());
  const Vector grad = obj.smooth_gradient(x);
  if (!grad.allFinite()) throw OracleEvaluationError("smooth gradient is not finite");
  Vector forward = x - eta * grad;
  if (!obj.prox_term) return forward;
  return obj.prox_term->analytic_prox(forward, eta);
}

Vector step_plm(const CompositeOuterInner& obj, double eta, const Vector& x, double tol) {
  check_eta_against_mu(eta, obj.prox_modulus());
  if (tol <= 0.0) tol = default_inner_tolerance(x);
  LinearizedSubproblem sub;
  sub.outer = &obj.outer;
  sub.prox_term = obj.prox_term ? &*obj.prox_term : nullptr;
  sub.jacobian = obj.inner_jacobian(x);
  sub.offset = obj.inner_map(x) - sub.jacobian * x;
  sub.center = x;
  sub.step = eta;
  if (!sub.jacobian.allFinite() || !sub.offset.allFinite()) {
    throw OracleEvaluationError("inner map or its Jacobian is not finite");
  }
  SubproblemOptions opt;
  opt.tolerance = tol;
  return solve_linearized_subproblem(sub, opt).point;
}

StepOperator StepOperator::prox_point(ProblemOracle oracle, double eta, InnerTolerance tol,
                                      bool enforce_half_bound) {
  validate_envelope_parameter(oracle, eta);
  const double l = weak_convexity(oracle);
  if (enforce_half_bound && l > 0.0 && eta > 0.5 / l) {
    throw ParameterError("prox-point step size must satisfy eta <= 0.5/l (eta=" +
                         std::to_string(eta) + ", l=" + std::to_string(l) + ")");
  }
  StepOperator op(StepKind::ProxPoint, std::make_shared<const ProblemOracle>(std::move(oracle)), eta,
                  tol);
  op.enforce_half_bound_ = enforce_half_bound;
  return op;
}

StepOperator StepOperator::prox_gradient(CompositeSmoothPlusProx oracle, double eta,
                                         InnerTolerance tol) {
  check_eta_against_mu(eta, oracle.prox_modulus());
  if (oracle.prox_term && !oracle.prox_term->has_analytic_prox()) {
    throw ParameterError("prox-gradient needs an analytic prox for the nonsmooth term");
  }
  return StepOperator(StepKind::ProxGradient,
                      std::make_shared<const ProblemOracle>(std::move(oracle)), eta, tol);
}

StepOperator StepOperator::prox_linear(CompositeOuterInner oracle, double eta, InnerTolerance tol) {
  check_eta_against_mu(eta, oracle.prox_modulus());
  return StepOperator(StepKind::ProxLinear,
                      std::make_shared<const ProblemOracle>(std::move(oracle)), eta, tol);
}

StepOperator StepOperator::with_step_size(double eta) const {
  switch (kind_) {
    case StepKind::ProxPoint:
      return prox_point(*oracle_, eta, tol_, enforce_half_bound_);
    case StepKind::ProxGradient:
      return prox_gradient(std::get<CompositeSmoothPlusProx>(*oracle_), eta, tol_);
    case StepKind::ProxLinear:
      return prox_linear(std::get<CompositeOuterInner>(*oracle_), eta, tol_);
  }
  throw ParameterError("unknown step kind");
}

int StepOperator::dimension() const { return pertprox::dimension(*oracle_); }

Vector StepOperator::apply(const Vector& x) const {
  if (!x.allFinite()) throw OracleEvaluationError("step applied to a non-finite point");
  Vector next;
  switch (kind_) {
    case StepKind::ProxPoint:
      next = step_ppa(*oracle_, eta_, x, tol_.at(x));
      break;
    case StepKind::ProxGradient:
      next = step_pgm(std::get<CompositeSmoothPlusProx>(*oracle_), eta_, x);
      break;
    case StepKind::ProxLinear:
      next = step_plm(std::get<CompositeOuterInner>(*oracle_), eta_, x, tol_.at(x));
      break;
  }
  if (!next.allFinite()) throw OracleEvaluationError("step produced a non-finite point");
  return next;
}

ModelFunction make_model(const StepOperator& op, const Vector& x) {
  ModelFunction model;
  model.base_point = x;
  const auto handle = op.oracle_handle();
  const ProblemOracle& oracle = *handle;
  model.objective = [handle](const Vector& y) { return evaluate(*handle, y); };

  switch (op.kind()) {
    case StepKind::ProxPoint:
      model.evaluate = model.objective;
      model.model_beta = 0.0;
      model.model_mu = weak_convexity(oracle);
      break;
    case StepKind::ProxGradient: {
      const auto& o = std::get<CompositeSmoothPlusProx>(oracle);
      const double gx = o.smooth_value(x);
      const Vector grad = o.smooth_gradient(x);
      model.evaluate = [handle, &o, x, gx, grad](const Vector& y) {
        double v = gx + grad.dot(y - x);
        if (o.prox_term) v += o.prox_term->value(y);
        return v;
      };
      model.model_beta = o.gradient_lipschitz;
      model.model_mu = o.prox_modulus();
      break;
    }
    case StepKind::ProxLinear: {
      const auto& o = std::get<CompositeOuterInner>(oracle);
      const Vector fx = o.inner_map(x);
      const Matrix jac = o.inner_jacobian(x);
      model.evaluate = [handle, &o, x, fx, jac](const Vector& y) {
        double v = o.outer.value(fx + jac * (y - x));
        if (o.prox_term) v += o.prox_term->value(y);
        return v;
      };
      model.model_beta = o.model_beta();
      model.model_mu = o.prox_modulus();
      break;
    }
  }
  return model;
}

double model_error_probe(const ModelFunction& model, int samples, double radius,
                         std::uint64_t seed) {
  if (samples < 100) throw ParameterError("model error probe needs at least 100 samples");
  std::mt19937_64 rng(seed);
  const int d = static_cast<int>(model.base_point.size());
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector y = model.base_point + sample_ball(d, radius, rng);
    const double dist2 = (y - model.base_point).squaredNorm();
    if (dist2 == 0.0) continue;
    const double gap = std::abs(model.objective(y) - model.evaluate(y));
    worst = std::max(worst, gap / (0.5 * dist2));
  }
  return worst;
}

}  // namespace pertprox
