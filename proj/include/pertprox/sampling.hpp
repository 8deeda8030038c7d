#pragma once

#include <random>

#include "pertprox/types.hpp"

namespace pertprox {

// Uniform sample from the d-dimensional Euclidean ball of the given radius:
// normalized standard Gaussian direction, norm radius * u^(1/d) with u ~ U(0, 1).
Vector sample_ball(int d, double radius, std::mt19937_64& rng);

}  // namespace pertprox
