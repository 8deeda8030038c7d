#include "pertprox/subproblem.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace pertprox {

double LinearizedSubproblem::objective(const Vector& y) const {
  double v = outer->value(offset + jacobian * y) + 0.5 / step * (y - center).squaredNorm();
  if (prox_term != nullptr) v += prox_term->value(y);
  return v;
}

Vector conjugate_prox(const ConvexOuter& outer, const Vector& q, double t) {
  if (outer.conjugate_prox) return outer.conjugate_prox(q, t);
  return q - t * outer.prox(q / t, 1.0 / t);
}

namespace {

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

SubproblemResult solve_dual_fista(const LinearizedSubproblem& p, double g_norm,
                                  const SubproblemOptions& opt) {
  const Matrix& g = p.jacobian;
  const double s = p.step;
  const double tau = 1.0 / (s * g_norm * g_norm);
  auto primal = [&](const Vector& u) -> Vector { return p.center - s * (g.transpose() * u); };

  Vector u = Vector::Zero(g.rows());
  Vector v = u;
  double momentum = 1.0;
  SubproblemResult res;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    const Vector yv = primal(v);
    // grad of the dual objective (to be minimized) at v is -(offset + G y(v)).
    const Vector u_next = conjugate_prox(*p.outer, v + tau * (p.offset + g * yv), tau);
    const Vector y_next = primal(u_next);
    if (!y_next.allFinite()) throw OracleEvaluationError("linearized subproblem diverged");

    res.point = y_next;
    res.iterations = k;
    res.residual = (y_next - yv).norm();
    if (res.residual <= opt.tolerance) return res;

    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    if ((v - u_next).dot(u_next - u) > 0.0) {
      // gradient-based adaptive restart
      momentum = 1.0;
      v = u_next;
    } else {
      v = u_next + ((momentum - 1.0) / next_momentum) * (u_next - u);
      momentum = next_momentum;
    }
    u = u_next;
  }
  throw ConvergenceError("dual solver for the linearized subproblem hit its iteration cap",
                         res.point, res.residual);
}

SubproblemResult solve_primal_dual(const LinearizedSubproblem& p, double g_norm,
                                   const SubproblemOptions& opt) {
  const Matrix& g = p.jacobian;
  const double s = p.step;
  const double tau = s;
  const double sigma = 0.99 / (tau * g_norm * g_norm);
  const double kappa = s * tau / (s + tau);
  auto primal_prox = [&](const Vector& q) -> Vector {
    return p.prox_term->analytic_prox((tau * p.center + s * q) / (s + tau), kappa);
  };

  Vector y = p.center;
  Vector y_bar = y;
  Vector u = Vector::Zero(g.rows());
  SubproblemResult res;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    const Vector q = u + sigma * (g * y_bar);
    const Vector u_next = conjugate_prox(*p.outer, q + sigma * p.offset, sigma);
    const Vector y_next = primal_prox(y - tau * (g.transpose() * u_next));
    if (!y_next.allFinite()) throw OracleEvaluationError("linearized subproblem diverged");

    const double dy = (y_next - y).norm();
    const double du = s * (g.transpose() * (u_next - u)).norm();
    y_bar = 2.0 * y_next - y;
    y = y_next;
    u = u_next;
    res.point = y;
    res.iterations = k;
    res.residual = std::max(dy, du);
    if (res.residual <= opt.tolerance) return res;
  }
  throw ConvergenceError("primal-dual solver for the linearized subproblem hit its iteration cap",
                         res.point, res.residual);
}

}  // namespace

SubproblemResult solve_linearized_subproblem(const LinearizedSubproblem& problem,
                                             const SubproblemOptions& options) {
  if (problem.outer == nullptr) throw ParameterError("linearized subproblem needs an outer function");
  if (!(problem.step > 0.0)) throw ParameterError("linearized subproblem step must be positive");
  if (problem.prox_term != nullptr && !problem.prox_term->has_analytic_prox()) {
    throw ParameterError("prox term of a linearized subproblem needs an analytic prox");
  }

  const double g_norm = spectral_norm(problem.jacobian);
  if (g_norm == 0.0) {
    // h(offset) is constant in y
    SubproblemResult res;
    res.point = problem.prox_term != nullptr
                    ? problem.prox_term->analytic_prox(problem.center, problem.step)
                    : problem.center;
    return res;
  }
  if (problem.prox_term == nullptr) return solve_dual_fista(problem, g_norm, options);
  return solve_primal_dual(problem, g_norm, options);
}

}  // namespace pertprox
