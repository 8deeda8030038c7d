#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pertprox/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Perturbed proximal methods: run, certify and sweep experiments"};
  app.require_subcommand(1);

  pertprox::CommandOptions flags;
  std::string seeds;
  std::string out_dir;
  std::string mode;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seeds", seeds, "seed list, e.g. 0-19 or 1,4,9");
    cmd->add_option("--out-dir", out_dir,
                    std::string("output root (default: config output_dir, then $") +
                        pertprox::kOutputRootEnv + ", then ./runs)");
    cmd->add_option("--mode", mode, "stationarity test")
        ->check(CLI::IsMember({"envelope", "gradient_mapping"}));
    cmd->add_flag("--quiet", flags.quiet, "print nothing on success");
  };

  std::string config;
  std::string point;
  CLI::App* run = app.add_subcommand("run", "run all seeds of an experiment");
  run->add_option("config", config, "experiment config (JSON)")->required();
  add_common(run);

  CLI::App* certify = app.add_subcommand("certify", "certify one point");
  certify->add_option("config", config, "experiment config (JSON)")->required();
  certify->add_option("--point", point, "x1,x2,... or a CSV file")->required();
  add_common(certify);

  CLI::App* sweep = app.add_subcommand("sweep", "escape fraction over a (r, T_interval, eta) grid");
  sweep->add_option("config", config, "experiment config (JSON)")->required();
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pertprox::kExitConfig;
  }

  if (!seeds.empty()) flags.seeds = seeds;
  if (!out_dir.empty()) flags.out_dir = out_dir;
  if (!mode.empty()) flags.mode = mode;

  if (run->parsed()) return pertprox::cmd_run(config, flags, std::cout, std::cerr);
  if (certify->parsed()) return pertprox::cmd_certify(config, point, flags, std::cout, std::cerr);
  return pertprox::cmd_sweep(config, flags, std::cout, std::cerr);
}
