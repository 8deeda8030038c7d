#include "pertprox/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "pertprox/moreau.hpp"
#include "pertprox/trajectory_io.hpp"

namespace pertprox {

using json = nlohmann::ordered_json;

std::size_t SweepGrid::cells() const {
  return std::max<std::size_t>(r.size(), 1) * std::max<std::size_t>(interval.size(), 1) *
         std::max<std::size_t>(eta.size(), 1);
}

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> seeds(20);
  for (std::uint64_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
  return seeds;
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ConfigError("field '" + path + "': " + what);
}

// Reads the members of one JSON object, remembering which keys were used so that
// leftovers can be reported as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      field_error(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }

  std::optional<double> number(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) field_error(path(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) field_error(path(key), "must be finite");
    return x;
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) field_error(path(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) field_error(path(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) field_error(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (const json& e : *v) {
      if (!e.is_number()) field_error(path(key), "expected an array of numbers");
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) field_error(path(key), "entries must be finite");
    }
    return out;
  }

  std::optional<std::vector<std::int64_t>> integers(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) field_error(path(key), "expected an array of integers");
    std::vector<std::int64_t> out;
    for (const json& e : *v) {
      if (!e.is_number_integer()) field_error(path(key), "expected an array of integers");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) field_error(path(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ScheduleForm parse_form(const std::string& s, const std::string& path) {
  if (s == "general") return ScheduleForm::General;
  if (s == "prox_point") return ScheduleForm::ProxPoint;
  field_error(path, "expected 'general' or 'prox_point', got '" + s + "'");
}

std::string form_name(ScheduleForm f) {
  return f == ScheduleForm::General ? "general" : "prox_point";
}

void parse_problem(const json& j, ExperimentConfig& cfg) {
  if (j.is_string()) {
    cfg.problem = j.get<std::string>();
    return;
  }
  ObjectReader r(j, "problem");
  const auto name = r.string("name");
  if (!name) field_error("problem.name", "required");
  cfg.problem = *name;
  if (const json* params = r.find("params")) {
    if (!params->is_object()) field_error("problem.params", "expected an object");
    for (auto it = params->begin(); it != params->end(); ++it) {
      const std::string path = "problem.params." + it.key();
      std::vector<double> values;
      if (it->is_number()) {
        values.push_back(it->get<double>());
      } else if (it->is_array()) {
        for (const json& e : *it) {
          if (!e.is_number()) field_error(path, "expected a number or an array of numbers");
          values.push_back(e.get<double>());
        }
      } else {
        field_error(path, "expected a number or an array of numbers");
      }
      cfg.problem_params[it.key()] = std::move(values);
    }
  }
  r.finish();
}

void parse_schedule(const json& j, ScheduleConfig& s) {
  ObjectReader r(j, "schedule");
  s.epsilon = r.number("epsilon");
  if (auto v = r.number("delta")) s.delta = *v;
  if (auto v = r.number("c")) s.c = *v;
  if (const json* l = r.find("L")) {
    if (l->is_string()) {
      if (l->get<std::string>() != "auto") field_error("schedule.L", "expected a number or \"auto\"");
      s.L_auto = true;
    } else if (l->is_number()) {
      s.L = l->get<double>();
    } else {
      field_error("schedule.L", "expected a number or \"auto\"");
    }
  }
  s.rho = r.number("rho");
  s.f_lower = r.number("f_lower");
  if (auto v = r.string("form")) s.form = parse_form(*v, "schedule.form");
  r.finish();
}

void parse_overrides(const json& j, OverrideConfig& o) {
  ObjectReader r(j, "overrides");
  o.eta = r.number("eta");
  o.lambda = r.number("lambda");
  o.r = r.number("r");
  o.interval = r.integer("T_interval");
  o.total_iterations = r.integer("T");
  r.finish();
}

void parse_tolerances(const json& j, ToleranceConfig& t) {
  ObjectReader r(j, "tolerances");
  if (auto v = r.number("inner_tol")) t.inner_tol = *v;
  if (auto v = r.number("fd_step")) t.fd_step = *v;
  if (auto v = r.number("power_tol")) t.power_tol = *v;
  r.finish();
}

void parse_sweep(const json& j, SweepGrid& g) {
  ObjectReader r(j, "sweep");
  if (auto v = r.numbers("r")) g.r = *v;
  if (auto v = r.integers("T_interval")) g.interval = *v;
  if (auto v = r.numbers("eta")) g.eta = *v;
  r.finish();
}

// Checks that do not need the problem.
void check_ranges(const ExperimentConfig& c) {
  const ScheduleConfig& s = c.schedule;
  if (s.epsilon && !(*s.epsilon > 0.0)) field_error("schedule.epsilon", "must be positive");
  if (!(s.delta > 0.0 && s.delta < 1.0)) field_error("schedule.delta", "must lie in (0, 1)");
  if (!(s.c > 0.0)) field_error("schedule.c", "must be positive");
  if (s.L && !(*s.L > 0.0)) field_error("schedule.L", "must be positive");
  if (s.rho && !(*s.rho > 0.0)) field_error("schedule.rho", "must be positive");
  const OverrideConfig& o = c.overrides;
  if (o.eta && !(*o.eta > 0.0)) field_error("overrides.eta", "must be positive");
  if (o.lambda && !(*o.lambda > 0.0)) field_error("overrides.lambda", "must be positive");
  if (o.r && *o.r < 0.0) field_error("overrides.r", "must be nonnegative");
  if (o.interval && *o.interval < 0) field_error("overrides.T_interval", "must be nonnegative");
  if (o.total_iterations && *o.total_iterations < 0) field_error("overrides.T", "must be nonnegative");
  if (c.seeds.empty()) field_error("seeds", "must not be empty");
  if (c.record_stride < 1) field_error("record_stride", "must be at least 1");
  if (!(c.escape_radius > 0.0)) field_error("escape_radius", "must be positive");
  if (!(c.tolerances.inner_tol > 0.0)) field_error("tolerances.inner_tol", "must be positive");
  if (c.tolerances.fd_step < 0.0) field_error("tolerances.fd_step", "must be nonnegative");
  if (!(c.tolerances.power_tol > 0.0)) field_error("tolerances.power_tol", "must be positive");
  for (double v : c.sweep.r) {
    if (v < 0.0) field_error("sweep.r", "entries must be nonnegative");
  }
  for (std::int64_t v : c.sweep.interval) {
    if (v < 0) field_error("sweep.T_interval", "entries must be nonnegative");
  }
  for (double v : c.sweep.eta) {
    if (!(v > 0.0)) field_error("sweep.eta", "entries must be positive");
  }
  if (c.sweep.cells() > kMaxSweepCells) {
    field_error("sweep", fmt::format("{} cells exceed the limit of {}", c.sweep.cells(), kMaxSweepCells));
  }
}

ExperimentConfig config_from_json(const json& root) {
  ExperimentConfig cfg;
  ObjectReader r(root, "");
  const json* problem = r.find("problem");
  if (problem == nullptr) field_error("problem", "required");
  parse_problem(*problem, cfg);

  const auto algorithm = r.string("algorithm");
  if (!algorithm) field_error("algorithm", "required");
  try {
    cfg.algorithm = parse_step_kind(*algorithm);
  } catch (const ParameterError& e) {
    field_error("algorithm", e.what());
  }

  cfg.x0 = r.numbers("x0");
  if (const json* s = r.find("schedule")) parse_schedule(*s, cfg.schedule);
  if (const json* o = r.find("overrides")) parse_overrides(*o, cfg.overrides);
  if (const json* seeds = r.find("seeds")) {
    if (!seeds->is_array()) field_error("seeds", "expected an array of nonnegative integers");
    cfg.seeds.clear();
    for (const json& e : *seeds) {
      if (!e.is_number_unsigned()) field_error("seeds", "expected an array of nonnegative integers");
      cfg.seeds.push_back(e.get<std::uint64_t>());
    }
  }
  if (auto mode = r.string("stationarity_mode")) {
    try {
      cfg.mode = parse_stationarity_mode(*mode);
    } catch (const ParameterError& e) {
      field_error("stationarity_mode", e.what());
    }
  }
  cfg.output_dir = r.string("output_dir");
  if (const json* t = r.find("tolerances")) parse_tolerances(*t, cfg.tolerances);
  if (auto v = r.integer("record_stride")) cfg.record_stride = *v;
  if (auto v = r.number("escape_radius")) cfg.escape_radius = *v;
  if (const json* g = r.find("sweep")) parse_sweep(*g, cfg.sweep);
  r.finish();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(fmt::format("syntax error at line {}, column {}: {}", line, column, e.what()));
  }

  ExperimentConfig cfg = config_from_json(root);
  check_ranges(cfg);
  try {
    prepare_experiment(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json vector_json(const Vector& x) { return json(std::vector<double>(x.data(), x.data() + x.size())); }

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  json params = json::object();
  for (const auto& [key, values] : c.problem_params) params[key] = values;
  j["problem"] = {{"name", c.problem}, {"params", params}};
  j["algorithm"] = to_string(c.algorithm);
  j["x0"] = optional_json(c.x0);
  const ScheduleConfig& s = c.schedule;
  j["schedule"] = {{"epsilon", optional_json(s.epsilon)},
                   {"delta", s.delta},
                   {"c", s.c},
                   {"L", s.L_auto ? json("auto") : optional_json(s.L)},
                   {"rho", optional_json(s.rho)},
                   {"f_lower", optional_json(s.f_lower)},
                   {"form", form_name(s.form)}};
  const OverrideConfig& o = c.overrides;
  j["overrides"] = {{"eta", optional_json(o.eta)},
                    {"lambda", optional_json(o.lambda)},
                    {"r", optional_json(o.r)},
                    {"T_interval", optional_json(o.interval)},
                    {"T", optional_json(o.total_iterations)}};
  j["seeds"] = c.seeds;
  j["stationarity_mode"] = to_string(c.mode);
  j["output_dir"] = optional_json(c.output_dir);
  j["tolerances"] = {{"inner_tol", c.tolerances.inner_tol},
                     {"fd_step", c.tolerances.fd_step},
                     {"power_tol", c.tolerances.power_tol}};
  j["record_stride"] = c.record_stride;
  j["escape_radius"] = c.escape_radius;
  j["sweep"] = {{"r", c.sweep.r}, {"T_interval", c.sweep.interval}, {"eta", c.sweep.eta}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// preparation

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  BenchmarkProblem problem = make_problem(config.problem, config.problem_params);
  const StepKind kind = config.algorithm;
  if (!problem.supports(kind)) {
    throw ParameterError("problem '" + problem.name + "' has no " + to_string(kind) + " formulation");
  }
  const ModelConstants mc = problem.model_constants(kind);
  const ProblemOracle oracle = problem.oracle_for(kind);
  const auto found = problem.settings.find(kind);
  const AlgorithmSettings settings =
      found != problem.settings.end() ? found->second : AlgorithmSettings{auto_L(mc.beta, mc.mu)};

  const ScheduleConfig& sc = config.schedule;
  const double epsilon = sc.epsilon.value_or(settings.epsilon);
  const double rho = sc.rho.value_or(settings.rho);
  const double f_lower = sc.f_lower.value_or(problem.f_lower);
  const double L = sc.L_auto ? auto_L(mc.beta, mc.mu) : sc.L.value_or(settings.L);
  const InnerTolerance tol{config.tolerances.inner_tol};

  Vector x0 = problem.x0;
  if (config.x0) {
    x0 = Eigen::Map<const Vector>(config.x0->data(), static_cast<Eigen::Index>(config.x0->size()));
  }
  if (x0.size() != problem.dimension()) {
    throw ConfigError(fmt::format("field 'x0': expected {} coordinates, got {}", problem.dimension(),
                                  x0.size()));
  }

  const OverrideConfig& ov = config.overrides;
  double lambda = 0.0;
  if (ov.lambda) {
    lambda = *ov.lambda;
  } else if (sc.form == ScheduleForm::ProxPoint) {
    lambda = 1.0 / L;
  } else {
    lambda = envelope_parameter(L, mc.beta, mc.mu);
  }
  try {
    validate_envelope_parameter(oracle, lambda);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("field 'overrides.lambda': ") + e.what());
  }
  const double gap = moreau_grad(oracle, lambda, x0, tol.at(x0)).envelope_value - f_lower;
  if (!(gap > 0.0)) {
    throw ConfigError("field 'schedule.f_lower': must lie below the envelope value at x0");
  }

  ScheduleParams params;
  if (sc.form == ScheduleForm::ProxPoint) {
    if (kind != StepKind::ProxPoint) {
      throw ConfigError("field 'schedule.form': prox_point form needs algorithm ppa");
    }
    params = compute_prox_point_schedule(
        {epsilon, sc.delta, rho, lambda, weak_convexity(oracle), problem.dimension(), gap, sc.c});
  } else {
    ScheduleInputs in{epsilon, sc.delta, mc.beta, mc.mu, rho, problem.dimension(), gap, sc.c, L};
    params = compute_schedule(in);
    params.lambda = lambda;
  }
  if (ov.eta) params.eta = *ov.eta;
  if (ov.r) params.r = *ov.r;
  if (ov.interval) {
    params.interval = *ov.interval;
    params.interval_real = static_cast<double>(*ov.interval);
  }
  if (ov.total_iterations) {
    params.total_iterations = *ov.total_iterations;
    params.total_iterations_real = static_cast<double>(*ov.total_iterations);
  }

  StepOperator op = [&] {
    try {
      return problem.make_operator(kind, params.eta, tol);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("step size: ") + e.what());
    }
  }();

  RunOptions run_options;
  run_options.mode = config.mode;
  run_options.record_stride = config.record_stride;
  run_options.envelope_tolerance = tol;

  CertifyOptions certify_options;
  certify_options.spectral.fd_step = config.tolerances.fd_step;
  certify_options.spectral.power_tol = config.tolerances.power_tol;
  certify_options.inner_tol = tol;

  return {std::move(problem), std::move(op), params, std::move(x0), run_options, certify_options};
}

// ---------------------------------------------------------------------------
// running

bool near_labeled_min(const BenchmarkProblem& problem, const Vector& x, double radius) {
  if (!x.allFinite()) return false;
  for (const Vector& m : problem.points_with_label(PointLabel::LocalMin)) {
    if ((x - m).norm() <= radius) return true;
  }
  return false;
}

namespace {

SeedResult run_one(const PreparedExperiment& prep, std::uint64_t seed, double escape_radius,
                   const std::filesystem::path& out_dir) {
  SeedResult res;
  res.seed = seed;
  Trajectory traj;
  try {
    traj = run(prep.op, prep.x0, prep.params, seed, prep.run_options);
  } catch (const RunError& e) {
    traj = e.partial();
    res.failed = true;
    res.error = e.what();
  }
  res.iterations = traj.iterations;
  if (!out_dir.empty()) {
    res.trajectory_file = out_dir / fmt::format("seed_{}.csv", seed);
    write_trajectory_csv(res.trajectory_file, traj.iterates, prep.op.dimension());
  }
  if (traj.iterates.empty()) return res;

  try {
    res.summary = summarize(traj.iterates, prep.op, prep.params, prep.certify_options);
    res.final_certificate =
        certify_point(prep.op, traj.iterates.back().x, prep.params, prep.certify_options);
  } catch (const Error& e) {
    if (!res.failed) res.error = std::string("summary failed: ") + e.what();
    res.failed = true;
  }
  res.escaped = !res.failed && near_labeled_min(prep.problem, traj.iterates.back().x, escape_radius);
  return res;
}

}  // namespace

std::vector<SeedResult> run_seeds(const PreparedExperiment& prepared,
                                  const std::vector<std::uint64_t>& seeds, double escape_radius,
                                  const std::filesystem::path& out_dir) {
  std::vector<SeedResult> results(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = run_one(prepared, seeds[i], escape_radius, out_dir);
      } catch (const std::exception& e) {
        results[i].seed = seeds[i];
        results[i].failed = true;
        results[i].error = e.what();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(seeds.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  return results;
}

TrajectorySummary summarize_file(const std::filesystem::path& csv,
                                 const PreparedExperiment& prepared) {
  return summarize(read_trajectory_csv(csv), prepared.op, prepared.params,
                   prepared.certify_options);
}

std::filesystem::path fresh_output_dir(const std::filesystem::path& root, const std::string& prefix) {
  std::filesystem::create_directories(root);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  for (int k = 0;; ++k) {
    const std::string name =
        k == 0 ? fmt::format("{}-{}", prefix, stamp) : fmt::format("{}-{}-{}", prefix, stamp, k);
    const std::filesystem::path dir = root / name;
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

std::filesystem::path output_root(const std::optional<std::string>& flag,
                                  const ExperimentConfig& config) {
  if (flag) return *flag;
  if (config.output_dir) return *config.output_dir;
  if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') return env;
  return "runs";
}

// ---------------------------------------------------------------------------
// JSON outputs

namespace {

json schedule_to_json(const ScheduleParams& p) {
  return {{"form", form_name(p.form)},
          {"L", p.L},
          {"lambda", p.lambda},
          {"eta", p.eta},
          {"r", p.r},
          {"T_interval", p.interval},
          {"T_interval_real", p.interval_real},
          {"decrease_threshold", p.decrease_threshold},
          {"localization_radius", p.localization_radius},
          {"iota", p.iota},
          {"T", p.total_iterations},
          {"T_real", p.total_iterations_real},
          {"theta1", p.theta1},
          {"theta2", p.theta2},
          {"epsilon", p.epsilon},
          {"delta", p.delta},
          {"rho", p.rho},
          {"beta", p.beta},
          {"mu", p.mu},
          {"c", p.c},
          {"dimension", p.dimension},
          {"envelope_gap", p.envelope_gap}};
}

json certificate_to_json(const Certificate& c) {
  return {{"point", vector_json(c.point)},
          {"grad_mapping_norm", c.grad_mapping_norm},
          {"lambda_max_S", c.lambda_max_S},
          {"threshold", c.threshold},
          {"is_eps_local_min", c.is_eps_local_min},
          {"indeterminate", c.indeterminate},
          {"epsilon", c.epsilon},
          {"rho", c.rho},
          {"eta", c.eta},
          {"lambda", c.lambda}};
}

json summary_to_json(const TrajectorySummary& s) {
  return {{"records", s.records},
          {"large_gradient", s.large_gradient},
          {"saddle_like", s.saddle_like},
          {"certified", s.certified},
          {"indeterminate", s.indeterminate},
          {"perturbations", s.perturbations},
          {"certified_fraction", s.certified_fraction},
          {"final_point", vector_json(s.final_point)},
          {"final_envelope_value", s.final_envelope_value}};
}

}  // namespace

std::string schedule_json(const ScheduleParams& params) { return schedule_to_json(params).dump(2); }

std::string certificate_json(const Certificate& cert) { return certificate_to_json(cert).dump(2); }

std::string run_record_json(const RunRecord& record) {
  json seeds = json::array();
  for (const SeedResult& s : record.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"iterations", s.iterations},
                     {"trajectory", s.trajectory_file.filename().string()},
                     {"failed", s.failed},
                     {"partial", s.failed},
                     {"error", s.error},
                     {"escaped", s.escaped},
                     {"summary", summary_to_json(s.summary)},
                     {"final_certificate", certificate_to_json(s.final_certificate)}});
  }
  json j;
  j["version"] = record.version;
  j["problem"] = record.config.problem;
  j["algorithm"] = to_string(record.config.algorithm);
  j["stationarity_mode"] = to_string(record.config.mode);
  j["schedule"] = schedule_to_json(record.params);
  j["escape_fraction"] = record.escape_fraction;
  j["failures"] = record.failures;
  j["wall_seconds"] = record.wall_seconds;
  j["config"] = json::parse(serialize_config(record.config));
  j["seeds"] = std::move(seeds);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// sweeps

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
  const PreparedExperiment base = prepare_experiment(config);
  const std::vector<double> rs = config.sweep.r.empty() ? std::vector<double>{base.params.r}
                                                        : config.sweep.r;
  const std::vector<std::int64_t> intervals = config.sweep.interval.empty()
                                                  ? std::vector<std::int64_t>{base.params.interval}
                                                  : config.sweep.interval;
  const std::vector<double> etas = config.sweep.eta.empty() ? std::vector<double>{base.params.eta}
                                                            : config.sweep.eta;
  if (rs.size() * intervals.size() * etas.size() > kMaxSweepCells) {
    throw ConfigError("field 'sweep': too many cells");
  }

  std::vector<SweepRow> rows;
  for (double r : rs) {
    for (std::int64_t interval : intervals) {
      for (double eta : etas) {
        SweepRow row;
        row.r = r;
        row.interval = interval;
        row.eta = eta;
        row.seeds = static_cast<std::int64_t>(config.seeds.size());

        PreparedExperiment cell = base;
        cell.params.r = r;
        cell.params.interval = interval;
        cell.params.interval_real = static_cast<double>(interval);
        cell.params.eta = eta;
        try {
          cell.op = base.problem.make_operator(config.algorithm, eta,
                                               InnerTolerance{config.tolerances.inner_tol});
        } catch (const Error& e) {
          row.divergences = row.seeds;
          row.note = e.what();
          rows.push_back(std::move(row));
          continue;
        }

        const std::vector<SeedResult> results = run_seeds(cell, config.seeds, config.escape_radius, {});
        std::int64_t escaped = 0;
        std::int64_t perturbations = 0;
        for (const SeedResult& s : results) {
          if (s.failed) ++row.divergences;
          if (s.escaped) ++escaped;
          perturbations += s.summary.perturbations;
          if (s.failed && row.note.empty()) row.note = s.error;
        }
        row.escape_fraction = static_cast<double>(escaped) / static_cast<double>(row.seeds);
        row.mean_perturbations = static_cast<double>(perturbations) / static_cast<double>(row.seeds);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "r,T_interval,eta,escape_fraction,divergences,seeds,mean_perturbations,note\n";
  for (const SweepRow& row : rows) {
    std::string note = row.note;
    for (char& ch : note) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
    out += fmt::format("{:.17g},{},{:.17g},{:.17g},{},{},{:.17g},{}\n", row.r, row.interval, row.eta,
                       row.escape_fraction, row.divergences, row.seeds, row.mean_perturbations, note);
  }
  return out;
}

// ---------------------------------------------------------------------------
// commands

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("--seeds: '" + s + "' is not a nonnegative integer");
    }
    if (used != s.size()) throw ConfigError("--seeds: '" + s + "' is not a nonnegative integer");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    const std::size_t dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(number(item));
      continue;
    }
    const std::uint64_t lo = number(item.substr(0, dash));
    const std::uint64_t hi = number(item.substr(dash + 1));
    if (hi < lo) throw ConfigError("--seeds: empty range '" + item + "'");
    if (hi - lo >= 100000) throw ConfigError("--seeds: range '" + item + "' is too long");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("--seeds: no seeds given");
  return seeds;
}

namespace {

std::vector<double> parse_number_row(const std::string& line, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + item + "' is not a number");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw ConfigError(what + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(what + ": no coordinates");
  return out;
}

}  // namespace

Vector parse_point(const std::string& text) {
  std::vector<double> coords;
  if (std::filesystem::is_regular_file(text)) {
    std::ifstream in(text);
    std::string first;
    std::getline(in, first);
    if (first.rfind("t,", 0) == 0) {
      in.clear();
      in.seekg(0);
      const std::vector<IterateRecord> recs = read_trajectory_csv(in);
      if (recs.empty()) throw ConfigError("--point: trajectory file has no iterates");
      return recs.back().x;
    }
    coords = parse_number_row(first, "--point");
  } else {
    coords = parse_number_row(text, "--point");
  }
  return Eigen::Map<const Vector>(coords.data(), static_cast<Eigen::Index>(coords.size()));
}

namespace {

// Loads the config and applies the command-line flags; reports and returns nullopt on error.
std::optional<ExperimentConfig> load_with_flags(const std::filesystem::path& path,
                                                const CommandOptions& flags, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(path);
    if (flags.seeds) cfg.seeds = parse_seed_list(*flags.seeds);
    if (flags.mode) {
      try {
        cfg.mode = parse_stationarity_mode(*flags.mode);
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("--mode: ") + e.what());
      }
    }
    return cfg;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return std::nullopt;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const CommandOptions& flags,
            std::ostream& out, std::ostream& err, RunRecord* record_out) {
  const std::optional<ExperimentConfig> cfg = load_with_flags(config_path, flags, err);
  if (!cfg) return kExitConfig;

  std::optional<PreparedExperiment> prep;
  try {
    prep = prepare_experiment(*cfg);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  RunRecord record;
  record.config = *cfg;
  record.params = prep->params;
  try {
    record.directory = fresh_output_dir(output_root(flags.out_dir, *cfg), "run");
    write_text(record.directory / "config.json", serialize_config(*cfg));

    const auto start = std::chrono::steady_clock::now();
    record.seeds = run_seeds(*prep, cfg->seeds, cfg->escape_radius, record.directory);
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::int64_t escaped = 0;
    for (const SeedResult& s : record.seeds) {
      if (s.escaped) ++escaped;
      if (s.failed) ++record.failures;
    }
    record.escape_fraction = static_cast<double>(escaped) / static_cast<double>(record.seeds.size());
    write_text(record.directory / "summary.json", run_record_json(record));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }

  if (!flags.quiet) {
    out << fmt::format("{} {} on {}: T={} r={:.3g} interval={} eta={:.4g} lambda={:.4g}\n", kVersion,
                       to_string(cfg->algorithm), cfg->problem, record.params.total_iterations,
                       record.params.r, record.params.interval, record.params.eta,
                       record.params.lambda);
    out << fmt::format("{:>6} {:>10} {:>8} {:>10} {:>8} {:>8}  {}\n", "seed", "iters", "perturb",
                       "certified", "escaped", "status", "final point");
    for (const SeedResult& s : record.seeds) {
      std::string point;
      for (Eigen::Index i = 0; i < s.summary.final_point.size(); ++i) {
        point += fmt::format("{}{:.6g}", i == 0 ? "" : ", ", s.summary.final_point[i]);
      }
      out << fmt::format("{:>6} {:>10} {:>8} {:>10.3f} {:>8} {:>8}  ({})\n", s.seed, s.iterations,
                         s.summary.perturbations, s.summary.certified_fraction,
                         s.escaped ? "yes" : "no", s.failed ? "FAILED" : "ok", point);
    }
    out << fmt::format("escape fraction {:.3f}, failures {}, {:.2f} s\n", record.escape_fraction,
                       record.failures, record.wall_seconds);
    out << "output: " << record.directory.string() << "\n";
  }
  for (const SeedResult& s : record.seeds) {
    if (s.failed) err << "seed " << s.seed << " failed: " << s.error << "\n";
  }
  const int code = record.failures > 0 ? kExitSolver : kExitOk;
  if (record_out != nullptr) *record_out = std::move(record);
  return code;
}

int cmd_certify(const std::filesystem::path& config_path, const std::string& point,
                const CommandOptions& flags, std::ostream& out, std::ostream& err,
                Certificate* certificate, std::filesystem::path* directory) {
  const std::optional<ExperimentConfig> cfg = load_with_flags(config_path, flags, err);
  if (!cfg) return kExitConfig;

  std::optional<PreparedExperiment> prep;
  Vector x;
  try {
    prep = prepare_experiment(*cfg);
    x = parse_point(point);
    if (x.size() != prep->op.dimension()) {
      throw ConfigError(fmt::format("--point: expected {} coordinates, got {}", prep->op.dimension(),
                                    x.size()));
    }
    if (!x.allFinite()) throw ConfigError("--point: coordinates must be finite");
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const Certificate cert = certify_point(prep->op, x, prep->params, prep->certify_options);
    const std::filesystem::path dir = fresh_output_dir(output_root(flags.out_dir, *cfg), "certify");
    const std::string text = certificate_json(cert) + "\n";
    write_text(dir / "certificate.json", text);
    write_text(dir / "config.json", serialize_config(*cfg));
    if (!flags.quiet) out << text;
    if (certificate != nullptr) *certificate = cert;
    if (directory != nullptr) *directory = dir;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_sweep(const std::filesystem::path& config_path, const CommandOptions& flags,
              std::ostream& out, std::ostream& err, std::vector<SweepRow>* rows_out,
              std::filesystem::path* directory) {
  const std::optional<ExperimentConfig> cfg = load_with_flags(config_path, flags, err);
  if (!cfg) return kExitConfig;

  std::vector<SweepRow> rows;
  try {
    rows = run_sweep(*cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }

  try {
    const std::filesystem::path dir = fresh_output_dir(output_root(flags.out_dir, *cfg), "sweep");
    write_text(dir / "sweep.csv", sweep_csv(rows));
    write_text(dir / "config.json", serialize_config(*cfg));
    if (directory != nullptr) *directory = dir;
    if (!flags.quiet) {
      out << fmt::format("{:>12} {:>10} {:>12} {:>8} {:>8} {:>10}\n", "r", "T_interval", "eta",
                         "escape", "diverged", "perturb");
      for (const SweepRow& row : rows) {
        out << fmt::format("{:>12.4g} {:>10} {:>12.4g} {:>8.3f} {:>8} {:>10.2f}\n", row.r,
                           row.interval, row.eta, row.escape_fraction, row.divergences,
                           row.mean_perturbations);
      }
      out << "output: " << dir.string() << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  if (rows_out != nullptr) *rows_out = std::move(rows);
  return kExitOk;
}

}  // namespace pertprox
