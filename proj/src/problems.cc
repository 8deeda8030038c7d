#include "pertprox/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "pertprox/schedule.hpp"

namespace pertprox {

std::string to_string(PointLabel label) {
  switch (label) {
    case PointLabel::Saddle:
      return "saddle";
    case PointLabel::LocalMin:
      return "local_min";
    case PointLabel::LocalMax:
      return "local_max";
  }
  return "unknown";
}

bool BenchmarkProblem::supports(StepKind kind) const {
  switch (kind) {
    case StepKind::ProxPoint:
      return true;
    case StepKind::ProxGradient:
      return smooth_plus_prox.has_value();
    case StepKind::ProxLinear:
      return outer_inner.has_value();
  }
  return false;
}

ProblemOracle BenchmarkProblem::oracle_for(StepKind kind) const {
  if (!supports(kind)) {
    throw ParameterError("problem '" + name + "' has no " + to_string(kind) + " formulation");
  }
  switch (kind) {
    case StepKind::ProxPoint:
      // prefer the closed-form prox; otherwise hand the structured form to the inner solver
      if (objective.has_analytic_prox()) return objective;
      if (smooth_plus_prox) return *smooth_plus_prox;
      if (outer_inner) return *outer_inner;
      return objective;
    case StepKind::ProxGradient:
      return *smooth_plus_prox;
    case StepKind::ProxLinear:
      return *outer_inner;
  }
  return objective;
}

ModelConstants BenchmarkProblem::model_constants(StepKind kind) const {
  if (!supports(kind)) {
    throw ParameterError("problem '" + name + "' has no " + to_string(kind) + " formulation");
  }
  switch (kind) {
    case StepKind::ProxPoint:
      return {0.0, objective.weak_convexity};
    case StepKind::ProxGradient:
      return {smooth_plus_prox->gradient_lipschitz, smooth_plus_prox->prox_modulus()};
    case StepKind::ProxLinear:
      return {outer_inner->model_beta(), outer_inner->prox_modulus()};
  }
  return {};
}

StepOperator BenchmarkProblem::make_operator(StepKind kind, double eta, InnerTolerance tol) const {
  switch (kind) {
    case StepKind::ProxPoint:
      return StepOperator::prox_point(oracle_for(kind), eta, tol);
    case StepKind::ProxGradient:
      return StepOperator::prox_gradient(std::get<CompositeSmoothPlusProx>(oracle_for(kind)), eta,
                                         tol);
    case StepKind::ProxLinear:
      return StepOperator::prox_linear(std::get<CompositeOuterInner>(oracle_for(kind)), eta, tol);
  }
  throw ParameterError("unknown step kind");
}

std::vector<Vector> BenchmarkProblem::points_with_label(PointLabel label) const {
  std::vector<Vector> out;
  for (const CriticalPoint& cp : critical_points) {
    if (cp.label == label) out.push_back(cp.point);
  }
  return out;
}

Vector radial_abs_prox(const Vector& z, double lambda) {
  const double a = z.norm();
  auto cost = [&](double s) { return std::abs(s * s - 1.0) + (s - a) * (s - a) / (2.0 * lambda); };

  double best_s = 1.0;
  double best = cost(1.0);
  auto consider = [&](double s) {
    const double v = cost(s);
    if (v < best) {
      best = v;
      best_s = s;
    }
  };
  // outside the unit sphere: 2s + (s - a)/lambda = 0
  const double outer = a / (1.0 + 2.0 * lambda);
  if (outer > 1.0) consider(outer);
  // inside: -2s + (s - a)/lambda = 0, a minimizer only while the piece is convex
  if (lambda < 0.5) {
    const double inner = a / (1.0 - 2.0 * lambda);
    if (inner >= 0.0 && inner < 1.0) consider(inner);
  }
  consider(0.0);

  Vector direction = Vector::Zero(z.size());
  if (a > 0.0) {
    direction = z / a;
  } else {
    direction[0] = 1.0;
  }
  return best_s * direction;
}

namespace {

Vector soft_threshold(const Vector& v, double t) {
  return v.array().sign() * (v.array().abs() - t).max(0.0);
}

Vector unit_vector(int d, int i) {
  Vector e = Vector::Zero(d);
  e[i] = 1.0;
  return e;
}

NonsmoothObjective l1_norm(int d, double weight) {
  NonsmoothObjective m;
  m.dimension = d;
  m.weak_convexity = 0.0;
  m.value = [weight](const Vector& x) { return weight * x.lpNorm<1>(); };
  m.analytic_prox = [weight](const Vector& x, double t) { return soft_threshold(x, weight * t); };
  m.subgradient = [weight](const Vector& x) -> Vector { return weight * x.array().sign().matrix(); };
  return m;
}

}  // namespace

BenchmarkProblem make_quadratic(int d) {
  if (d < 1) throw ParameterError("dimension must be at least 1");
  BenchmarkProblem p;
  p.name = "quadratic";
  p.objective.dimension = d;
  p.objective.weak_convexity = 0.0;
  p.objective.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  p.objective.analytic_prox = [](const Vector& x, double t) -> Vector { return x / (1.0 + t); };
  p.objective.subgradient = [](const Vector& x) -> Vector { return x; };

  CompositeSmoothPlusProx spp;
  spp.dimension = d;
  spp.smooth_value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  spp.smooth_gradient = [](const Vector& x) -> Vector { return x; };
  spp.gradient_lipschitz = 1.0;
  spp.declared_weak_convexity = 0.0;
  p.smooth_plus_prox = spp;

  CompositeOuterInner oi;
  oi.dimension = d;
  oi.inner_map = [](const Vector& x) -> Vector { return x; };
  oi.inner_jacobian = [d](const Vector&) -> Matrix { return Matrix::Identity(d, d); };
  oi.outer.dimension = d;
  oi.outer.value = [](const Vector& z) { return 0.5 * z.squaredNorm(); };
  oi.outer.prox = [](const Vector& z, double t) -> Vector { return z / (1.0 + t); };
  oi.outer.conjugate_prox = [](const Vector& u, double t) -> Vector { return u / (1.0 + t); };
  oi.outer_lipschitz = 1.0;
  oi.jacobian_lipschitz = 0.0;
  oi.declared_weak_convexity = 0.0;
  p.outer_inner = oi;

  p.critical_points = {{Vector::Zero(d), PointLabel::LocalMin}};
  // grad S is constant, so any positive rho is admissible.
  p.settings = {{StepKind::ProxPoint, {2.0, 1.0}},
                {StepKind::ProxGradient, {4.0, 1.0}},
                {StepKind::ProxLinear, {2.0, 1.0}}};
  p.x0 = Vector::Constant(d, 0.0);
  p.x0[0] = 2.0;
  p.f_lower = 0.0;
  return p;
}

BenchmarkProblem make_abs(int d) {
  if (d < 1) throw ParameterError("dimension must be at least 1");
  BenchmarkProblem p;
  p.name = "abs";
  p.objective = l1_norm(d, 1.0);

  CompositeSmoothPlusProx spp;
  spp.dimension = d;
  spp.smooth_value = [](const Vector&) { return 0.0; };
  spp.smooth_gradient = [d](const Vector&) -> Vector { return Vector::Zero(d); };
  spp.gradient_lipschitz = 0.0;
  spp.prox_term = l1_norm(d, 1.0);
  p.smooth_plus_prox = spp;

  CompositeOuterInner oi;
  oi.dimension = d;
  oi.inner_map = [](const Vector& x) -> Vector { return x; };
  oi.inner_jacobian = [d](const Vector&) -> Matrix { return Matrix::Identity(d, d); };
  oi.outer.dimension = d;
  oi.outer.value = [](const Vector& z) { return z.lpNorm<1>(); };
  oi.outer.prox = [](const Vector& z, double t) { return soft_threshold(z, t); };
  oi.outer.conjugate_prox = [](const Vector& u, double) -> Vector {
    return u.cwiseMax(-1.0).cwiseMin(1.0);
  };
  oi.outer_lipschitz = std::sqrt(static_cast<double>(d));
  oi.jacobian_lipschitz = 0.0;
  p.outer_inner = oi;

  p.critical_points = {{Vector::Zero(d), PointLabel::LocalMin}};
  p.settings = {{StepKind::ProxPoint, {2.0, 1.0}},
                {StepKind::ProxGradient, {2.0, 1.0}},
                {StepKind::ProxLinear, {2.0, 1.0}}};
  p.x0 = Vector::Constant(d, 2.0);
  p.f_lower = 0.0;
  return p;
}

BenchmarkProblem make_abs_square_minus_one() {
  BenchmarkProblem p;
  p.name = "abs-square-minus-one";
  p.objective.dimension = 1;
  p.objective.weak_convexity = 2.0;
  p.objective.value = [](const Vector& x) { return std::abs(x[0] * x[0] - 1.0); };
  p.objective.analytic_prox = [](const Vector& x, double t) { return radial_abs_prox(x, t); };
  p.objective.subgradient = [](const Vector& x) -> Vector {
    const double s = x[0] * x[0] - 1.0;
    Vector g(1);
    g[0] = (s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0)) * 2.0 * x[0];
    return g;
  };

  CompositeOuterInner oi;
  oi.dimension = 1;
  oi.inner_map = [](const Vector& x) -> Vector { return x.array().square().matrix(); };
  oi.inner_jacobian = [](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, 2.0 * x[0]); };
  oi.outer.dimension = 1;
  oi.outer.value = [](const Vector& z) { return std::abs(z[0] - 1.0); };
  oi.outer.prox = [](const Vector& z, double t) -> Vector {
    return Vector::Ones(1) + soft_threshold(z - Vector::Ones(1), t);
  };
  // h*(u) = u + indicator(|u| <= 1)
  oi.outer.conjugate_prox = [](const Vector& u, double t) -> Vector {
    return Vector::Constant(1, std::clamp(u[0] - t, -1.0, 1.0));
  };
  oi.outer_lipschitz = 1.0;
  oi.jacobian_lipschitz = 2.0;
  oi.declared_weak_convexity = 2.0;
  p.outer_inner = oi;

  p.critical_points = {{Vector::Constant(1, 1.0), PointLabel::LocalMin},
                       {Vector::Constant(1, -1.0), PointLabel::LocalMin},
                       {Vector::Constant(1, 0.0), PointLabel::LocalMax}};
  p.settings = {{StepKind::ProxPoint, {7.0, 1.0}}, {StepKind::ProxLinear, {8.0, 10.0}}};
  p.x0 = Vector::Constant(1, 0.3);
  p.f_lower = 0.0;
  return p;
}

BenchmarkProblem make_circle_abs() {
  BenchmarkProblem p;
  p.name = "circle-abs";
  p.objective.dimension = 2;
  p.objective.weak_convexity = 2.0;
  p.objective.value = [](const Vector& x) { return std::abs(x.squaredNorm() - 1.0) + x[0]; };
  // |‖y‖^2 - 1| + y_1 + ||y - x||^2/(2t) = |‖y‖^2 - 1| + ||y - (x - t e_1)||^2/(2t) + const
  p.objective.analytic_prox = [](const Vector& x, double t) {
    Vector z = x;
    z[0] -= t;
    return radial_abs_prox(z, t);
  };
  p.objective.subgradient = [](const Vector& x) -> Vector {
    const double s = x.squaredNorm() - 1.0;
    const double sign = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
    Vector g = 2.0 * sign * x;
    g[0] += 1.0;
    return g;
  };

  // h(z) = |z_1 - 1| + z_2 with F(x) = (||x||^2, x_1)
  CompositeOuterInner oi;
  oi.dimension = 2;
  oi.inner_map = [](const Vector& x) -> Vector {
    Vector f(2);
    f << x.squaredNorm(), x[0];
    return f;
  };
  oi.inner_jacobian = [](const Vector& x) -> Matrix {
    Matrix j(2, 2);
    j << 2.0 * x[0], 2.0 * x[1], 1.0, 0.0;
    return j;
  };
  oi.outer.dimension = 2;
  oi.outer.value = [](const Vector& z) { return std::abs(z[0] - 1.0) + z[1]; };
  oi.outer.prox = [](const Vector& z, double t) -> Vector {
    Vector out(2);
    const double shifted = z[0] - 1.0;
    out[0] = 1.0 + (shifted > 0.0 ? 1.0 : -1.0) * std::max(std::abs(shifted) - t, 0.0);
    out[1] = z[1] - t;
    return out;
  };
  // h*(u) = u_1 + indicator(|u_1| <= 1, u_2 = 1)
  oi.outer.conjugate_prox = [](const Vector& u, double t) -> Vector {
    Vector out(2);
    out << std::clamp(u[0] - t, -1.0, 1.0), 1.0;
    return out;
  };
  oi.outer_lipschitz = std::sqrt(2.0);
  oi.jacobian_lipschitz = 2.0;
  oi.declared_weak_convexity = 2.0;
  p.outer_inner = oi;

  p.critical_points = {{unit_vector(2, 0), PointLabel::Saddle},
                       {-unit_vector(2, 0), PointLabel::LocalMin},
                       {0.5 * unit_vector(2, 0), PointLabel::LocalMax}};
  // The prox-linear saddle eigenvalue is 1 + eta, which needs eps < 1/rho to stand out.
  p.settings = {{StepKind::ProxPoint, {7.0, 12.0}}, {StepKind::ProxLinear, {12.0, 16.0, 0.05}}};
  p.x0 = unit_vector(2, 0);
  p.f_lower = -1.0;
  return p;
}

BenchmarkProblem make_lasso_nonconvex(const Matrix& a, const Vector& b, double tau,
                                      double curvature) {
  const int d = static_cast<int>(a.cols());
  if (d < 1 || a.rows() != b.size()) throw ParameterError("lasso dimensions do not match");
  if (!(tau >= 0.0) || !(curvature >= 0.0)) {
    throw ParameterError("lasso tau and curvature must be nonnegative");
  }
  const Matrix gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const double gram_min = eig.eigenvalues().minCoeff();
  const double gram_max = eig.eigenvalues().maxCoeff();

  BenchmarkProblem p;
  p.name = "lasso-nonconvex";

  CompositeSmoothPlusProx spp;
  spp.dimension = d;
  spp.smooth_value = [a, b, curvature](const Vector& x) {
    return 0.5 * (a * x - b).squaredNorm() - 0.5 * curvature * x.squaredNorm();
  };
  spp.smooth_gradient = [a, b, curvature](const Vector& x) -> Vector {
    return a.transpose() * (a * x - b) - curvature * x;
  };
  spp.gradient_lipschitz = gram_max + curvature;
  spp.prox_term = l1_norm(d, tau);
  spp.declared_weak_convexity = std::max(0.0, curvature - gram_min);
  p.smooth_plus_prox = spp;

  p.objective.dimension = d;
  p.objective.weak_convexity = spp.declared_weak_convexity;
  p.objective.value = [spp](const Vector& x) { return spp.value(x); };
  p.objective.subgradient = [spp, tau](const Vector& x) -> Vector {
    return spp.smooth_gradient(x) + tau * x.array().sign().matrix();
  };

  // Orthogonal columns decouple the coordinates: x_i = soft((A^T b)_i, tau) / (G_ii - c).
  const Matrix off_diagonal = gram - Matrix(gram.diagonal().asDiagonal());
  if (off_diagonal.cwiseAbs().maxCoeff() < 1e-14 && curvature < gram_min) {
    const Vector atb = a.transpose() * b;
    Vector x = soft_threshold(atb, tau);
    for (int i = 0; i < d; ++i) x[i] /= gram(i, i) - curvature;
    p.critical_points = {{x, PointLabel::LocalMin}};
  }

  if (curvature < gram_min) {
    const Vector atb = a.transpose() * b;
    const Matrix shifted = gram - curvature * Matrix::Identity(d, d);
    p.f_lower = 0.5 * b.squaredNorm() - 0.5 * atb.dot(shifted.lu().solve(atb));
  } else {
    // unbounded below along the eigenvectors with eigenvalue below the curvature
    p.f_lower = -std::numeric_limits<double>::infinity();
  }
  p.settings = {{StepKind::ProxPoint, {auto_L(0.0, spp.declared_weak_convexity), 1.0}},
                {StepKind::ProxGradient, {4.0 * spp.gradient_lipschitz, 1.0}}};
  p.x0 = Vector::Zero(d);
  return p;
}

BenchmarkProblem make_robust_phase_retrieval(int d, int num_measurements, const Vector& x_true,
                                             std::uint64_t seed) {
  if (d < 1 || d > 10) throw ParameterError("phase retrieval is desk scale: 1 <= d <= 10");
  if (num_measurements < 1) throw ParameterError("phase retrieval needs at least one measurement");
  if (x_true.size() != d) throw ParameterError("x_true dimension does not match d");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(num_measurements, d);
  for (int i = 0; i < num_measurements; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  const Vector b = (a * x_true).array().square().matrix();
  const double inv_m = 1.0 / num_measurements;
  const double max_row_sq = a.rowwise().squaredNorm().maxCoeff();

  BenchmarkProblem p;
  p.name = "phase-retrieval";

  CompositeOuterInner oi;
  oi.dimension = d;
  oi.inner_map = [a](const Vector& x) -> Vector { return (a * x).array().square().matrix(); };
  oi.inner_jacobian = [a](const Vector& x) -> Matrix {
    return 2.0 * (a * x).asDiagonal() * a;
  };
  oi.outer.dimension = num_measurements;
  oi.outer.value = [b, inv_m](const Vector& z) { return inv_m * (z - b).lpNorm<1>(); };
  oi.outer.prox = [b, inv_m](const Vector& z, double t) -> Vector {
    return b + soft_threshold(z - b, inv_m * t);
  };
  // h*(u) = <u, b> + indicator(||u||_inf <= 1/m)
  oi.outer.conjugate_prox = [b, inv_m](const Vector& u, double t) -> Vector {
    return (u - t * b).cwiseMax(-inv_m).cwiseMin(inv_m);
  };
  oi.outer_lipschitz = 1.0;
  oi.jacobian_lipschitz = 2.0 * max_row_sq;
  p.outer_inner = oi;

  p.objective.dimension = d;
  p.objective.weak_convexity = oi.weak_convexity();
  p.objective.value = [oi](const Vector& x) { return oi.value(x); };
  p.objective.subgradient = [a, b, inv_m](const Vector& x) -> Vector {
    const Vector ax = a * x;
    const Vector sign = (ax.array().square() - b.array()).sign().matrix();
    return inv_m * (2.0 * a.transpose() * sign.cwiseProduct(ax));
  };

  p.critical_points = {{x_true, PointLabel::LocalMin},
                       {-x_true, PointLabel::LocalMin},
                       {Vector::Zero(d), PointLabel::LocalMax}};
  const double beta = oi.model_beta();
  p.settings = {{StepKind::ProxLinear, {4.0 * beta, 1.0}},
                {StepKind::ProxPoint, {4.0 * p.objective.weak_convexity, 1.0}}};
  p.x0 = Vector::Constant(d, 0.1);
  p.f_lower = 0.0;
  return p;
}

namespace {

double scalar_param(const ProblemParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (it->second.size() != 1) throw ParameterError("problem parameter '" + key + "' must be a scalar");
  return it->second.front();
}

int int_param(const ProblemParams& params, const std::string& key, int fallback) {
  const double v = scalar_param(params, key, fallback);
  if (v != std::floor(v)) throw ParameterError("problem parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

Vector vector_param(const ProblemParams& params, const std::string& key, const Vector& fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  return Eigen::Map<const Vector>(it->second.data(), static_cast<Eigen::Index>(it->second.size()));
}

void reject_unknown(const ProblemParams& params, const std::vector<std::string>& allowed,
                    const std::string& problem) {
  for (const auto& [key, value] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParameterError("unknown parameter '" + key + "' for problem '" + problem + "'");
    }
  }
}

}  // namespace

std::vector<std::string> problem_names() {
  return {"quadratic", "abs", "abs-square-minus-one", "circle-abs", "lasso-nonconvex",
          "phase-retrieval"};
}

BenchmarkProblem make_problem(const std::string& name, const ProblemParams& params) {
  if (name == "quadratic") {
    reject_unknown(params, {"d"}, name);
    return make_quadratic(int_param(params, "d", 2));
  }
  if (name == "abs") {
    reject_unknown(params, {"d"}, name);
    return make_abs(int_param(params, "d", 1));
  }
  if (name == "abs-square-minus-one") {
    reject_unknown(params, {}, name);
    return make_abs_square_minus_one();
  }
  if (name == "circle-abs") {
    reject_unknown(params, {}, name);
    return make_circle_abs();
  }
  if (name == "lasso-nonconvex") {
    reject_unknown(params, {"d", "A", "b", "tau", "curvature"}, name);
    const int d = int_param(params, "d", 2);
    Vector flat_default(4);
    flat_default << 1.2, 0.0, 0.0, 1.0;
    Vector b_default(2);
    b_default << 2.0, 0.5;
    const Matrix eye = Matrix::Identity(d, d);
    const Vector flat =
        vector_param(params, "A", d == 2 ? flat_default : Vector(eye.reshaped()));
    if (d < 1 || flat.size() % d != 0) throw ParameterError("lasso A must have a multiple of d entries");
    const Eigen::Index rows = flat.size() / d;
    Matrix a(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (int j = 0; j < d; ++j) a(i, j) = flat[i * d + j];
    }
    const Vector b = vector_param(params, "b", rows == 2 ? b_default : Vector::Ones(rows));
    return make_lasso_nonconvex(a, b, scalar_param(params, "tau", 0.4),
                                scalar_param(params, "curvature", 0.5));
  }
  if (name == "phase-retrieval") {
    reject_unknown(params, {"d", "m", "x_true", "seed"}, name);
    const int d = int_param(params, "d", 2);
    Vector x_default = Vector::Ones(d);
    if (d == 2) x_default << 1.0, 0.5;
    return make_robust_phase_retrieval(d, int_param(params, "m", 8),
                                       vector_param(params, "x_true", x_default),
                                       static_cast<std::uint64_t>(int_param(params, "seed", 7)));
  }
  throw ParameterError("unknown problem '" + name + "'");
}

}  // namespace pertprox
