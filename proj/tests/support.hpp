#pragma once

// Reference computations used as independent oracles by the tests. Nothing here calls
// into the library's solvers.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testsupport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// argmin of fn over the grid lo, lo + step, ..., hi.
inline double grid_argmin_1d(const std::function<double(double)>& fn, double lo, double hi,
                             double step) {
  double best_x = lo;
  double best = std::numeric_limits<double>::infinity();
  const long n = std::lround((hi - lo) / step);
  for (long i = 0; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double v = fn(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

// Full 2-D grid of the given step on [lo, hi]^2. Only for coarse steps.
inline Vec grid_argmin_2d(const std::function<double(double, double)>& fn, double lo, double hi,
                          double step) {
  Vec best_x(2);
  double best = std::numeric_limits<double>::infinity();
  const long n = std::lround((hi - lo) / step);
  for (long i = 0; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    for (long j = 0; j <= n; ++j) {
      const double y = lo + static_cast<double>(j) * step;
      const double v = fn(x, y);
      if (v < best) {
        best = v;
        best_x << x, y;
      }
    }
  }
  return best_x;
}

// Coarse grid over [lo, hi]^2, then nested grids of 41 x 41 points, each ten times finer,
// around the incumbent until the spacing reaches final_step. Sound for strongly convex fn.
inline Vec refined_argmin_2d(const std::function<double(double, double)>& fn, double lo,
                             double hi, double coarse_step, double final_step) {
  Vec best = grid_argmin_2d(fn, lo, hi, coarse_step);
  for (double step = coarse_step / 10.0; step >= final_step * 0.999; step /= 10.0) {
    double best_v = std::numeric_limits<double>::infinity();
    Vec next = best;
    for (int i = -20; i <= 20; ++i) {
      for (int j = -20; j <= 20; ++j) {
        const double x = best[0] + i * step;
        const double y = best[1] + j * step;
        const double v = fn(x, y);
        if (v < best_v) {
          best_v = v;
          next << x, y;
        }
      }
    }
    best = next;
  }
  return best;
}

// Central-difference Jacobian, written out independently of the library.
inline Mat dense_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& x, double h) {
  const Vec f0 = map(x);
  Mat j(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vec xp = x;
    Vec xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (map(xp) - map(xm)) / (2.0 * h);
  }
  return j;
}

// Largest real part among the eigenvalues of a square matrix.
inline double max_real_eigenvalue(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a);
  return es.eigenvalues().real().maxCoeff();
}

inline std::vector<Vec> random_points(int count, int d, double box, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) {
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = u(rng);
    pts.push_back(x);
  }
  return pts;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec1(double a) { return Vec::Constant(1, a); }

// g(x, y) = |x^2 + y^2 - 1| + x written out directly.
inline double circle_abs_value(double x, double y) { return std::abs(x * x + y * y - 1.0) + x; }

}  // namespace testsupport
