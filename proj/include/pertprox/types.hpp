#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pertprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An input violates a documented precondition (step size out of range, bad dimension, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// An oracle returned a non-finite value where a finite one was required.
class OracleEvaluationError : public Error {
 public:
  using Error::Error;
};

// An iterative inner solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vector best_iterate, double achieved)
      : Error(what), best_iterate_(std::move(best_iterate)), achieved_(achieved) {}

  const Vector& best_iterate() const { return best_iterate_; }
  // Termination measure reached by the best iterate.
  double achieved() const { return achieved_; }

 private:
  Vector best_iterate_;
  double achieved_;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace pertprox
