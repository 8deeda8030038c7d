#include "pertprox/sampling.hpp"

#include <cmath>

namespace pertprox {

Vector sample_ball(int d, double radius, std::mt19937_64& rng) {
  if (radius < 0.0) throw ParameterError("ball radius must be nonnegative");
  if (radius == 0.0) return Vector::Zero(d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector direction(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) direction[i] = normal(rng);
    norm = direction.norm();
  } while (norm == 0.0);
  const double length = radius * std::pow(unit(rng), 1.0 / d);
  return (length / norm) * direction;
}

}  // namespace pertprox
