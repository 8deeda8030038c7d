#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pertprox/certify.hpp"
#include "pertprox/sampling.hpp"
#include "pertprox/schedule.hpp"
#include "pertprox/steps.hpp"

namespace pertprox {

enum class StationarityMode {
  // ||grad f_lambda(x_t)|| <= eps, via the envelope.
  Envelope,
  // ||x_t - x_{t-1}|| / lambda <= eps; suppressed at t = 0.
  GradientMapping,
};

std::string to_string(StationarityMode mode);
StationarityMode parse_stationarity_mode(const std::string& name);

struct IterateRecord {
  std::int64_t t = 0;
  // The point the step operator is applied to (after any perturbation).
  Vector x;
  double envelope_value = 0.0;
  double grad_map_norm = 0.0;
  bool perturbed = false;
  std::uint64_t perturbation_seed = 0;
  // For perturbed records: S(x_{t-1}) before the kick and its envelope value.
  Vector arrival;
  double arrival_envelope_value = 0.0;
};

struct RunOptions {
  StationarityMode mode = StationarityMode::GradientMapping;
  // Record every k-th iterate; perturbation events and the final point are always recorded.
  std::int64_t record_stride = 1;
  // Tolerance of the envelope evaluations (relative, like the step's inner tolerance).
  InnerTolerance envelope_tolerance;
};

struct Trajectory {
  std::vector<IterateRecord> iterates;
  ScheduleParams params;
  std::uint64_t seed = 0;
  StationarityMode mode = StationarityMode::GradientMapping;
  std::int64_t record_stride = 1;
  std::int64_t perturbation_count = 0;
  std::int64_t iterations = 0;
};

// Raised when a step fails mid-run; carries everything recorded so far.
class RunError : public Error {
 public:
  RunError(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// Seed of the k-th perturbation event of a run (splitmix64 of the run seed and k).
std::uint64_t perturbation_seed(std::uint64_t run_seed, std::int64_t event);

// The perturbed proximal loop: for t = 0 .. T-1, if the stationarity test fires and
// t - t_perturb > interval, kick x_t by -eta * xi with xi uniform in the r-ball, then
// x_{t+1} = S(x_t). r = 0 disables perturbations. The final iterate x_T is always recorded.
Trajectory run(const StepOperator& op, const Vector& x0, const ScheduleParams& params,
               std::uint64_t seed, const RunOptions& options = {});

struct TrajectorySummary {
  std::int64_t records = 0;
  // ||grad f_lambda|| > eps
  std::int64_t large_gradient = 0;
  // small gradient but lambda_max(grad S) at or above the threshold
  std::int64_t saddle_like = 0;
  // both conditions hold
  std::int64_t certified = 0;
  std::int64_t indeterminate = 0;
  std::int64_t perturbations = 0;
  double certified_fraction = 0.0;
  Vector final_point;
  double final_envelope_value = 0.0;

  bool operator==(const TrajectorySummary& o) const;
};

// Classifies each recorded iterate by the two eps-approximate-local-minimum conditions.
// The spectral estimate is only computed for iterates with a small envelope gradient.
TrajectorySummary summarize(const std::vector<IterateRecord>& iterates, const StepOperator& op,
                            const ScheduleParams& params, const CertifyOptions& options = {});
TrajectorySummary summarize(const Trajectory& traj, const StepOperator& op,
                            const CertifyOptions& options = {});

}  // namespace pertprox
