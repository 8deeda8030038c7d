// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "pertprox/certify.hpp"
#include "pertprox/driver.hpp"
#include "pertprox/experiment.hpp"
#include "pertprox/moreau.hpp"
#include "pertprox/problems.hpp"
#include "pertprox/schedule.hpp"
#include "pertprox/trajectory_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace pertprox;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= limit_seconds) {
    o.pass = false;
    o.detail += fmt::format("; over the {:.0f} s limit", limit_seconds);
  }
  if (!o.pass) ++failures;
  fmt::print("{} criterion {}: {} ({}; {:.1f} s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail, secs);
  std::fflush(stdout);
}

Vector vec2(double a, double b) { return testsupport::vec2(a, b); }

PreparedExperiment prepared(const std::string& problem, StepKind kind, std::optional<std::vector<double>> x0,
                            double c, std::optional<std::int64_t> total) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  cfg.algorithm = kind;
  cfg.x0 = std::move(x0);
  cfg.schedule.c = c;
  cfg.overrides.total_iterations = total;
  return prepare_experiment(cfg);
}

Outcome moreau_identities() {
  struct Case {
    std::string name;
    double lambda;
    double fd_tol;
  };
  const std::vector<Case> cases = {
      {"quadratic", 0.5, 1e-6}, {"abs", 0.5, 1e-3}, {"abs-square-minus-one", 0.2, 1e-3}, {"circle-abs", 0.2, 1e-3}};
  int bad = 0;
  double worst_fd = 0.0;
  for (const Case& c : cases) {
    const BenchmarkProblem p = make_problem(c.name);
    const ProblemOracle o = p.oracle_for(StepKind::ProxPoint);
    for (const Vector& x : testsupport::random_points(100, p.dimension(), 2.0, 101)) {
      const MoreauState s = moreau_grad(o, c.lambda, x);
      const Vector identity = (x - s.prox_point) / c.lambda;
      const double fd = envelope_grad_fd_check(o, c.lambda, x, 1e-5);
      worst_fd = std::max(worst_fd, fd / c.fd_tol);
      if (!(s.envelope_gradient == identity) || s.envelope_value > evaluate(o, x) + 1e-8 || fd > c.fd_tol) ++bad;
    }
  }
  return {bad == 0, fmt::format("{} of 400 points violate; worst fd error / tolerance {:.2e}", bad, worst_fd)};
}

Outcome ppa_gd_equivalence() {
  const BenchmarkProblem p = make_circle_abs();
  const StepOperator op = StepOperator::prox_point(p.objective, 0.2);
  double worst = 0.0;
  for (const Vector& x : testsupport::random_points(100, 2, 2.0, 202)) {
    const MoreauState s = moreau_grad(p.objective, 0.2, x);
    worst = std::max(worst, (op.apply(x) - (x - 0.2 * s.envelope_gradient)).norm());
  }
  return {worst <= 1e-8, fmt::format("max deviation {:.2e}", worst)};
}

Outcome sufficient_decrease() {
  struct Case {
    std::string problem;
    StepKind kind;
    std::vector<double> x0;
  };
  const std::vector<Case> cases = {{"circle-abs", StepKind::ProxPoint, {0.3, 1.4}},
                                   {"lasso-nonconvex", StepKind::ProxGradient, {-1.0, 2.0}},
                                   {"phase-retrieval", StepKind::ProxLinear, {0.9, -1.2}}};
  std::string detail;
  bool ok = true;
  for (const Case& c : cases) {
    const PreparedExperiment p = prepared(c.problem, c.kind, c.x0, 4.0, 500);
    RunOptions opt;
    opt.mode = StationarityMode::Envelope;
    const Trajectory traj = run(p.op, p.x0, p.params, 0, opt);
    const ScheduleParams& s = p.params;
    int violations = 0;
    double slack_used = -1e300;
    for (std::size_t i = 0; i + 1 < traj.iterates.size(); ++i) {
      const IterateRecord& a = traj.iterates[i];
      const IterateRecord& b = traj.iterates[i + 1];
      // b.x is taken after any kick at t + 1; the step itself ends at the arrival point
      const Vector next = b.perturbed ? b.arrival : b.x;
      const double next_value = b.perturbed ? b.arrival_envelope_value : b.envelope_value;
      const double g2 = a.grad_map_norm * a.grad_map_norm;
      const double dec = next_value - (a.envelope_value - s.theta2 / (2 * s.L) * g2);
      const double move = (next - a.x).squaredNorm() - s.theta1 * s.eta * s.eta * g2;
      slack_used = std::max({slack_used, dec, move});
      if (dec > 1e-6 || move > 1e-6) ++violations;
    }
    ok = ok && violations == 0 && traj.iterates.size() == 501;
    detail += fmt::format("{}{} {}: {} violations, max excess {:.1e}", detail.empty() ? "" : "; ", c.problem,
                          to_string(c.kind), violations, slack_used);
  }
  return {ok, detail};
}

Outcome improve_or_localize(const fs::path& dir) {
  struct Case {
    std::string problem;
    StepKind kind;
    std::vector<double> x0;
    std::vector<std::uint64_t> seeds;
  };
  const std::vector<Case> cases = {
      {"circle-abs", StepKind::ProxPoint, {1.0, 0.0}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}},
      {"lasso-nonconvex", StepKind::ProxGradient, {-1.0, 2.0}, {0, 1}},
      {"phase-retrieval", StepKind::ProxLinear, {0.9, -1.2}, {0, 1}}};
  bool ok = true;
  long checked = 0;
  long violations = 0;
  for (const Case& c : cases) {
    const PreparedExperiment p = prepared(c.problem, c.kind, c.x0, 4.0, 1500);
    const fs::path out = dir / (c.problem + "-" + to_string(c.kind));
    fs::create_directories(out);
    run_seeds(p, c.seeds, 1e-3, out);
    const ScheduleParams& s = p.params;
    for (std::uint64_t seed : c.seeds) {
      const std::vector<IterateRecord> recs = read_trajectory_csv(out / fmt::format("seed_{}.csv", seed));
      std::size_t start = 0;
      for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i].perturbed) start = i;
        const double tau = static_cast<double>(recs[i].t - recs[start].t);
        const double drop = std::max(0.0, recs[start].envelope_value - recs[i].envelope_value);
        const double bound = std::sqrt(s.theta1 / s.theta2 * 2 * s.eta * tau * drop) + 1e-4;
        ++checked;
        if ((recs[i].x - recs[start].x).norm() > bound) ++violations;
      }
    }
  }
  ok = violations == 0 && checked > 0;
  return {ok, fmt::format("{} violations over {} persisted iterates", violations, checked)};
}

struct FullBudget {
  std::vector<SeedResult> results;
  PreparedExperiment prep;
};

// Circle-abs prox-point from the saddle with the computed schedule at c = 0.1 and its
// whole iteration budget.
FullBudget full_budget_run() {
  ExperimentConfig cfg;
  cfg.problem = "circle-abs";
  cfg.algorithm = StepKind::ProxPoint;
  cfg.x0 = std::vector<double>{1.0, 0.0};
  cfg.schedule.c = 0.1;
  cfg.schedule.epsilon = 0.1;
  cfg.record_stride = 1000;
  PreparedExperiment prep = prepare_experiment(cfg);
  prep.run_options.record_stride = 1000;
  std::vector<SeedResult> results = run_seeds(prep, default_seeds(), 1e-3, {});
  return {std::move(results), std::move(prep)};
}

Outcome saddle_escape(const FullBudget& fb) {
  int escaped = 0;
  for (const SeedResult& s : fb.results) {
    if (!s.failed && (s.summary.final_point - vec2(-1, 0)).norm() <= 1e-3) ++escaped;
  }
  PreparedExperiment still = fb.prep;
  still.params.r = 0.0;
  still.params.total_iterations = 1000;
  const Trajectory traj = run(still.op, vec2(1, 0), still.params, 0);
  double drift = 0.0;
  for (const IterateRecord& rec : traj.iterates) drift = std::max(drift, (rec.x - vec2(1, 0)).norm());
  const bool ok = escaped >= 18 && drift <= 1e-8 && traj.iterates.size() == 1001;
  return {ok, fmt::format("{}/20 seeds end within 1e-3 of (-1,0) after T={} (c={}); unperturbed drift {:.1e} over 1000 steps",
                          escaped, fb.prep.params.total_iterations, fb.prep.params.c, drift)};
}

Outcome certification() {
  const PreparedExperiment p = prepared("circle-abs", StepKind::ProxPoint, std::vector<double>{1.0, 0.0}, 0.1, {});
  const Certificate saddle = certify_point(p.op, vec2(1, 0), p.params);
  const Certificate minimum = certify_point(p.op, vec2(-1, 0), p.params);
  double worst = 0.0;
  for (const Vector& x : {vec2(1, 0), vec2(-1, 0)}) {
    const Matrix j = testsupport::dense_jacobian([&](const Vector& z) { return p.op.apply(z); }, x,
                                                 default_fd_step(x));
    const double dense = testsupport::max_real_eigenvalue(j);
    worst = std::max(worst, std::abs(estimate_lambda_max(p.op, x).lambda_max - dense));
  }
  const bool ok = saddle.lambda_max_S > saddle.threshold && !saddle.is_eps_local_min &&
                  minimum.is_eps_local_min && worst <= 1e-4;
  return {ok, fmt::format("saddle lambda_max {:.6f} vs threshold {:.6f}, certified {}; minimum lambda_max {:.6f}, "
                          "certified {}; power vs dense {:.1e}",
                          saddle.lambda_max_S, saddle.threshold, saddle.is_eps_local_min, minimum.lambda_max_S,
                          minimum.is_eps_local_min, worst)};
}

Outcome half_certified(const FullBudget& fb) {
  int good = 0;
  double lowest = 1.0;
  for (const SeedResult& s : fb.results) {
    if (!s.failed && s.summary.certified_fraction >= 0.5) ++good;
    lowest = std::min(lowest, s.summary.certified_fraction);
  }
  return {good >= 18, fmt::format("{}/20 seeds with >= 50% certified records; lowest fraction {:.3f}", good, lowest)};
}

Outcome plm_grid() {
  const BenchmarkProblem p = make_problem("phase-retrieval");
  const CompositeOuterInner& oi = *p.outer_inner;
  const double eta = 1.0 / p.settings.at(StepKind::ProxLinear).L;
  double worst = 0.0;
  for (const Vector& x : testsupport::random_points(20, 2, 1.5, 808)) {
    const Vector fx = oi.inner_map(x);
    const Matrix jx = oi.inner_jacobian(x);
    const Vector b = oi.inner_map(vec2(1.0, 0.5));
    const double m = static_cast<double>(fx.size());
    auto model = [&](double u, double v) {
      const Vector d = vec2(u, v) - x;
      return (fx + jx * d - b).lpNorm<1>() / m + d.squaredNorm() / (2 * eta);
    };
    // brute force over the box x + [-0.5, 0.5]^2
    const Vector local = testsupport::refined_argmin_2d(
        [&](double u, double v) { return model(x[0] + u, x[1] + v); }, -0.5, 0.5, 5e-3, 5e-7);
    worst = std::max(worst, (step_plm(oi, eta, x) - (x + local)).norm());
  }
  return {worst <= 1e-4, fmt::format("max distance to grid minimizer {:.1e} over 20 points (eta {:.4g})", worst, eta)};
}

Outcome schedule_purity() {
  ScheduleInputs in;
  in.epsilon = 0.1;
  in.delta = 0.1;
  in.beta = 1.0;
  in.mu = 0.0;
  in.rho = 1.0;
  in.dimension = 2;
  in.envelope_gap = 1.0;
  in.L = 4.0;
  const ScheduleParams a = compute_schedule(in);
  const ScheduleParams b = compute_schedule(in);
  // independent evaluation in extended precision
  const long double L = 4.0L;
  const long double beta = 1.0L;
  const long double lam = 1.0L / (L / 2 + beta / 4);
  const long double inv = 1.0L / lam;
  const long double t1 = (L - inv + beta) / (L - inv - beta) * (lam * L) * (lam * L);
  const long double t2 = (inv - beta) * (L * lam) / (inv + L - beta);
  auto digits12 = [](long double v) { return fmt::format("{:.12g}", static_cast<double>(v)); };
  const bool ok = a == b && digits12(a.lambda) == digits12(4.0L / 9.0L) && digits12(a.theta1) == digits12(t1) &&
                  digits12(a.theta2) == digits12(t2);
  return {ok, fmt::format("lambda {} theta1 {} (expected {}) theta2 {} (expected {})", digits12(a.lambda),
                          digits12(a.theta1), digits12(t1), digits12(a.theta2), digits12(t2))};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / fmt::format("pertprox-acceptance-{}", std::random_device{}());
  fs::create_directories(scratch);

  report(1, "Moreau identities", 10, moreau_identities);
  report(2, "prox-point step equals gradient step on the envelope", 5, ppa_gd_equivalence);
  report(3, "sufficient decrease", 60, sufficient_decrease);
  report(4, "improve or localize", 600, [&] { return improve_or_localize(scratch); });

  std::optional<FullBudget> fb;
  report(5, "saddle escape", 120, [&] {
    fb = full_budget_run();
    return saddle_escape(*fb);
  });
  report(6, "certification at the saddle and the minimum", 5, certification);
  report(7, "half of the iterates certified", 600, [&] {
    if (!fb) return Outcome{false, "full-budget run unavailable"};
    return half_certified(*fb);
  });
  report(8, "prox-linear step against grid search", 60, plm_grid);
  report(9, "schedule purity", 5, schedule_purity);

  fs::remove_all(scratch);
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
