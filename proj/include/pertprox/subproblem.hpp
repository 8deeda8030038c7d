#pragma once

#include "pertprox/oracles.hpp"

namespace pertprox {

// Convex subproblem shared by the prox-linear step and the prox-linear inner solver
// of the Moreau envelope:
//
//   minimize_y  h(offset + jacobian * y) + m(y) + (1 / (2 step)) ||y - center||^2
//
// With no m, restarted FISTA runs on the dual (box-like for polyhedral h) and
// the primal point is recovered as center - step * jacobian^T u. With m present
// a Chambolle-Pock primal-dual loop is used instead.
struct LinearizedSubproblem {
  const ConvexOuter* outer = nullptr;
  const NonsmoothObjective* prox_term = nullptr;
  Vector offset;
  Matrix jacobian;
  Vector center;
  double step = 1.0;

  double objective(const Vector& y) const;
};

struct SubproblemOptions {
  double tolerance = 1e-12;
  int max_iterations = 100000;
};

struct SubproblemResult {
  Vector point;
  int iterations = 0;
  // Primal movement of the last prox-gradient (or primal-dual) update.
  double residual = 0.0;
};

// Throws ConvergenceError (carrying the last iterate) on hitting the iteration cap.
SubproblemResult solve_linearized_subproblem(const LinearizedSubproblem& problem,
                                             const SubproblemOptions& options);

// prox_{t h*}(q): the outer's own conjugate prox when it has one, otherwise the Moreau
// decomposition q - t prox_{h/t}(q/t).
Vector conjugate_prox(const ConvexOuter& outer, const Vector& q, double t);

}  // namespace pertprox
