#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pertprox/certify.hpp"
#include "pertprox/driver.hpp"
#include "pertprox/problems.hpp"
#include "pertprox/schedule.hpp"

namespace pertprox {

inline constexpr const char* kVersion = "pertprox 0.1.0";

// Environment variable naming the default root for experiment output.
inline constexpr const char* kOutputRootEnv = "PERTPROX_OUT_ROOT";

// Malformed or inconsistent experiment configuration. The message names the offending
// field (dotted path) or the line of a syntax error.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct ScheduleConfig {
  // Unset fields fall back to the problem's recommended settings for the algorithm.
  std::optional<double> epsilon;
  double delta = 0.1;
  double c = 4.0;
  // "L": "auto" selects auto_L(beta, mu).
  bool L_auto = false;
  std::optional<double> L;
  std::optional<double> rho;
  std::optional<double> f_lower;
  ScheduleForm form = ScheduleForm::General;

  bool operator==(const ScheduleConfig&) const = default;
};

struct OverrideConfig {
  std::optional<double> eta;
  std::optional<double> lambda;
  std::optional<double> r;
  std::optional<std::int64_t> interval;
  std::optional<std::int64_t> total_iterations;

  bool operator==(const OverrideConfig&) const = default;
};

struct ToleranceConfig {
  // Relative inner tolerance of every prox solve: scale * (1 + ||x||).
  double inner_tol = 1e-10;
  // Non-positive selects default_fd_step(x).
  double fd_step = 0.0;
  double power_tol = 1e-6;

  bool operator==(const ToleranceConfig&) const = default;
};

// Cartesian grid for sweeps; an empty axis keeps the schedule value.
struct SweepGrid {
  std::vector<double> r;
  std::vector<std::int64_t> interval;
  std::vector<double> eta;

  std::size_t cells() const;
  bool operator==(const SweepGrid&) const = default;
};

inline constexpr std::size_t kMaxSweepCells = 1000;

std::vector<std::uint64_t> default_seeds();

struct ExperimentConfig {
  std::string problem;
  ProblemParams problem_params;
  StepKind algorithm = StepKind::ProxPoint;
  std::optional<std::vector<double>> x0;
  ScheduleConfig schedule;
  OverrideConfig overrides;
  std::vector<std::uint64_t> seeds = default_seeds();
  StationarityMode mode = StationarityMode::GradientMapping;
  std::optional<std::string> output_dir;
  ToleranceConfig tolerances;
  std::int64_t record_stride = 1;
  // A seed escaped when its final point lies within this distance of a labeled minimum.
  double escape_radius = 1e-3;
  SweepGrid sweep;

  bool operator==(const ExperimentConfig&) const = default;
};

// JSON text -> config. Throws ConfigError on syntax errors (with line and column),
// unknown or mistyped fields, and overrides that violate the schedule constraints.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Fully normalized JSON: every field is written, so parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// Problem, operator, schedule and start point resolved from a config.
struct PreparedExperiment {
  BenchmarkProblem problem;
  StepOperator op;
  ScheduleParams params;
  Vector x0;
  RunOptions run_options;
  CertifyOptions certify_options;
};

// Throws ParameterError when the problem, schedule or overrides are invalid.
PreparedExperiment prepare_experiment(const ExperimentConfig& config);

struct SeedResult {
  std::uint64_t seed = 0;
  std::int64_t iterations = 0;
  TrajectorySummary summary;
  Certificate final_certificate;
  bool escaped = false;
  // The run stopped on a solver error; the summary covers the partial trajectory.
  bool failed = false;
  std::string error;
  std::filesystem::path trajectory_file;
};

struct RunRecord {
  ExperimentConfig config;
  ScheduleParams params;
  std::vector<SeedResult> seeds;
  double escape_fraction = 0.0;
  std::int64_t failures = 0;
  double wall_seconds = 0.0;
  std::string version = kVersion;
  std::filesystem::path directory;
};

// Runs every seed (in parallel) and returns the per-seed results in seed order. When
// out_dir is non-empty, writes seed_<k>.csv per seed there.
std::vector<SeedResult> run_seeds(const PreparedExperiment& prepared,
                                  const std::vector<std::uint64_t>& seeds, double escape_radius,
                                  const std::filesystem::path& out_dir);

// Recomputes a seed's summary from its persisted trajectory file.
TrajectorySummary summarize_file(const std::filesystem::path& csv,
                                 const PreparedExperiment& prepared);

bool near_labeled_min(const BenchmarkProblem& problem, const Vector& x, double radius);

// Fresh directory <root>/<prefix>-<UTC timestamp>[-k]; never reuses an existing path.
std::filesystem::path fresh_output_dir(const std::filesystem::path& root, const std::string& prefix);
// --out-dir, then the config's output_dir, then $PERTPROX_OUT_ROOT, then ./runs.
std::filesystem::path output_root(const std::optional<std::string>& flag,
                                  const ExperimentConfig& config);

std::string schedule_json(const ScheduleParams& params);
std::string certificate_json(const Certificate& cert);
std::string run_record_json(const RunRecord& record);

struct SweepRow {
  double r = 0.0;
  std::int64_t interval = 0;
  double eta = 0.0;
  double escape_fraction = 0.0;
  std::int64_t divergences = 0;
  std::int64_t seeds = 0;
  double mean_perturbations = 0.0;
  std::string note;
};

// One row per grid cell, in r-major, then interval, then eta order. A cell whose operator
// cannot be built counts every seed as diverged; nothing in a cell aborts the sweep.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Seeds given as "0-19", "3", or "1,4,9" (ranges and lists may be mixed).
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
// Point given inline as "x1,x2,..." or as a file: a trajectory CSV (its last iterate is
// used) or a single row of numbers.
Vector parse_point(const std::string& text);

// Command-line flags shared by the subcommands; unset flags leave the config alone.
struct CommandOptions {
  std::optional<std::string> seeds;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  bool quiet = false;
};

// Exit codes: 0 success, 2 configuration error, 3 solver error (partial outputs written).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

int cmd_run(const std::filesystem::path& config_path, const CommandOptions& flags,
            std::ostream& out, std::ostream& err, RunRecord* record = nullptr);
int cmd_certify(const std::filesystem::path& config_path, const std::string& point,
                const CommandOptions& flags, std::ostream& out, std::ostream& err,
                Certificate* certificate = nullptr, std::filesystem::path* directory = nullptr);
int cmd_sweep(const std::filesystem::path& config_path, const CommandOptions& flags,
              std::ostream& out, std::ostream& err, std::vector<SweepRow>* rows = nullptr,
              std::filesystem::path* directory = nullptr);

}  // namespace pertprox
