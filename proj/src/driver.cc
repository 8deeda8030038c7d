#include "pertprox/driver.hpp"

#include <cmath>
#include <random>

#include "pertprox/moreau.hpp"

namespace pertprox {

std::string to_string(StationarityMode mode) {
  return mode == StationarityMode::Envelope ? "envelope" : "gradient_mapping";
}

StationarityMode parse_stationarity_mode(const std::string& name) {
  if (name == "envelope") return StationarityMode::Envelope;
  if (name == "gradient_mapping") return StationarityMode::GradientMapping;
  throw ParameterError("unknown stationarity mode '" + name +
                       "' (expected envelope or gradient_mapping)");
}

std::uint64_t perturbation_seed(std::uint64_t run_seed, std::int64_t event) {
  std::uint64_t z = run_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(event + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Trajectory run(const StepOperator& op, const Vector& x0, const ScheduleParams& params,
               std::uint64_t seed, const RunOptions& options) {
  if (x0.size() != op.dimension()) throw ParameterError("x0 dimension does not match the operator");
  if (!x0.allFinite()) throw ParameterError("x0 must be finite");
  if (params.total_iterations < 0 || params.interval < 0) {
    throw ParameterError("iteration counts must be nonnegative");
  }
  if (params.r < 0.0) throw ParameterError("perturbation radius must be nonnegative");
  if (!(params.lambda > 0.0)) throw ParameterError("envelope parameter must be positive");
  if (options.record_stride < 1) throw ParameterError("record stride must be at least 1");

  const ProblemOracle& oracle = op.oracle();
  const int d = op.dimension();
  const double eta = op.step_size();
  auto envelope = [&](const Vector& x) {
    return moreau_grad(oracle, params.lambda, x, options.envelope_tolerance.at(x));
  };

  Trajectory traj;
  traj.params = params;
  traj.seed = seed;
  traj.mode = options.mode;
  traj.record_stride = options.record_stride;

  Vector x = x0;
  Vector previous;
  std::int64_t t_perturb = 0;
  const std::int64_t total = params.total_iterations;

  auto record = [&](std::int64_t t, const Vector& point, const MoreauState* known) {
    IterateRecord rec;
    rec.t = t;
    rec.x = point;
    const MoreauState state = known != nullptr ? *known : envelope(point);
    rec.envelope_value = state.envelope_value;
    rec.grad_map_norm = state.envelope_gradient.norm();
    traj.iterates.push_back(std::move(rec));
  };

  try {
    for (std::int64_t t = 0; t < total; ++t) {
      std::optional<MoreauState> state;
      bool stationary = false;
      if (options.mode == StationarityMode::Envelope) {
        state = envelope(x);
        stationary = state->envelope_gradient.norm() <= params.epsilon;
      } else if (t > 0) {
        stationary = (x - previous).norm() / params.lambda <= params.epsilon;
      }

      bool perturbed = false;
      Vector arrival;
      std::uint64_t event_seed = 0;
      if (stationary && params.r > 0.0 && t - t_perturb > params.interval) {
        event_seed = perturbation_seed(seed, traj.perturbation_count);
        std::mt19937_64 rng(event_seed);
        arrival = x;
        x = x - eta * sample_ball(d, params.r, rng);
        t_perturb = t;
        perturbed = true;
        ++traj.perturbation_count;
        state.reset();
      }

      if (perturbed || t % options.record_stride == 0) {
        record(t, x, state ? &*state : nullptr);
        if (perturbed) {
          IterateRecord& rec = traj.iterates.back();
          rec.perturbed = true;
          rec.perturbation_seed = event_seed;
          rec.arrival_envelope_value = envelope(arrival).envelope_value;
          rec.arrival = std::move(arrival);
        }
      }

      Vector next = op.apply(x);
      previous = std::move(x);
      x = std::move(next);
      traj.iterations = t + 1;
    }
    record(total, x, nullptr);
  } catch (const Error& e) {
    throw RunError(std::string("run failed at iteration ") + std::to_string(traj.iterations) +
                       ": " + e.what(),
                   std::move(traj));
  }
  return traj;
}

bool TrajectorySummary::operator==(const TrajectorySummary& o) const {
  return records == o.records && large_gradient == o.large_gradient &&
         saddle_like == o.saddle_like && certified == o.certified &&
         indeterminate == o.indeterminate && perturbations == o.perturbations &&
         certified_fraction == o.certified_fraction && final_point == o.final_point &&
         final_envelope_value == o.final_envelope_value;
}

TrajectorySummary summarize(const std::vector<IterateRecord>& iterates, const StepOperator& op,
                            const ScheduleParams& params, const CertifyOptions& options) {
  TrajectorySummary s;
  if (iterates.empty()) throw ParameterError("cannot summarize an empty trajectory");
  const double threshold = 1.0 + op.step_size() * std::sqrt(params.rho * params.epsilon);
  for (const IterateRecord& rec : iterates) {
    ++s.records;
    if (rec.perturbed) ++s.perturbations;
    if (rec.grad_map_norm > params.epsilon) {
      ++s.large_gradient;
      continue;
    }
    const SpectralEstimate est = estimate_lambda_max(op, rec.x, options.spectral);
    if (!est.converged || est.asymmetric) {
      ++s.indeterminate;
    } else if (est.lambda_max < threshold) {
      ++s.certified;
    } else {
      ++s.saddle_like;
    }
  }
  s.certified_fraction = static_cast<double>(s.certified) / static_cast<double>(s.records);
  s.final_point = iterates.back().x;
  s.final_envelope_value = iterates.back().envelope_value;
  return s;
}

TrajectorySummary summarize(const Trajectory& traj, const StepOperator& op,
                            const CertifyOptions& options) {
  return summarize(traj.iterates, op, traj.params, options);
}

}  // namespace pertprox
