#include "pertprox/oracles.hpp"

#include <cmath>
#include <random>
#include <string>

namespace pertprox {

double CompositeSmoothPlusProx::value(const Vector& x) const {
  double v = smooth_value(x);
  if (prox_term) v += prox_term->value(x);
  return v;
}

double CompositeOuterInner::value(const Vector& x) const {
  double v = outer.value(inner_map(x));
  if (prox_term) v += prox_term->value(x);
  return v;
}

double evaluate(const ProblemOracle& oracle, const Vector& x) {
  return std::visit([&](const auto& o) -> double { return o.value(x); }, oracle);
}

double weak_convexity(const ProblemOracle& oracle) {
  return std::visit(
      [](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, NonsmoothObjective>) {
          return o.weak_convexity;
        } else {
          return o.weak_convexity();
        }
      },
      oracle);
}

int dimension(const ProblemOracle& oracle) {
  return std::visit([](const auto& o) { return o.dimension; }, oracle);
}

double checked_value(const ScalarFn& fn, const Vector& x) {
  const double v = fn(x);
  if (!std::isfinite(v)) {
    throw OracleEvaluationError("objective returned a non-finite value");
  }
  return v;
}

double default_fd_step(const Vector& x) { return 1e-5 * (1.0 + x.norm()); }

Vector finite_diff_gradient(const ScalarFn& fn, const Vector& x, double step) {
  if (step <= 0.0) step = default_fd_step(x);
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = checked_value(fn, probe);
    probe[i] = x[i] - step;
    const double down = checked_value(fn, probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

Matrix finite_diff_jacobian(const VectorFn& fn, const Vector& x, double step) {
  if (step <= 0.0) step = default_fd_step(x);
  Vector probe = x;
  Matrix jac;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const Vector up = fn(probe);
    probe[i] = x[i] - step;
    const Vector down = fn(probe);
    probe[i] = x[i];
    if (!up.allFinite() || !down.allFinite()) {
      throw OracleEvaluationError("vector map returned a non-finite value");
    }
    if (jac.size() == 0) jac.resize(up.size(), x.size());
    jac.col(i) = (up - down) / (2.0 * step);
  }
  return jac;
}

namespace {

Vector uniform_box(int d, double box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-box, box);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = unif(rng);
  return v;
}

}  // namespace

ConvexityCheck check_weak_convexity(const NonsmoothObjective& obj, int samples, std::uint64_t seed,
                                    double box) {
  if (obj.dimension < 1 || obj.dimension > 10) {
    throw ParameterError("weak convexity sampling is limited to 1 <= d <= 10");
  }
  if (samples < 100) throw ParameterError("weak convexity check needs at least 100 samples");

  const double l = obj.weak_convexity;
  auto shifted = [&](const Vector& z) { return checked_value(obj.value, z) + 0.5 * l * z.squaredNorm(); };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ConvexityCheck out;
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_box(obj.dimension, box, rng);
    const Vector y = uniform_box(obj.dimension, box, rng);
    const double theta = unit(rng);
    const double lhs = shifted(theta * x + (1.0 - theta) * y);
    const double rhs = theta * shifted(x) + (1.0 - theta) * shifted(y);
    out.worst_violation = std::max(out.worst_violation, lhs - rhs);
  }
  out.holds = out.worst_violation <= 1e-8;
  return out;
}

double gradient_lipschitz_ratio(const VectorFn& gradient, int dimension, int samples,
                                std::uint64_t seed, double box) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_box(dimension, box, rng);
    const Vector y = uniform_box(dimension, box, rng);
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    worst = std::max(worst, (gradient(x) - gradient(y)).norm() / dist);
  }
  return worst;
}

}  // namespace pertprox
