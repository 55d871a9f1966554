// Command-line driver: one experiment per invocation, configured by an INI file.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "bispec/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral bilinear estimate experiments"};
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool quick = false;
  bool check = false;
  app.add_option("--config", config_path, "experiment config file (INI)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default bispec-out)");
  app.add_option("--seed", seed, "RNG seed, overrides the config");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quick", quick, "reduced default grids");
  app.add_flag("--check", check, "rerun, compare outputs byte for byte, enforce thresholds");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? bispec::kExitOk : bispec::kExitValidation;
  }

  bispec::ExperimentPlan plan;
  try {
    auto cfg = bispec::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.threads = threads;
    cfg.quick = quick;
    plan = bispec::validate_config(cfg);
  } catch (const bispec::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return bispec::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return bispec::kExitValidation;
  }

  try {
    const auto outcome = check ? bispec::run_checked(plan, plan.config.out_dir) : bispec::run(plan, plan.config.out_dir);
    for (const auto& f : outcome.files) std::cout << f.string() << '\n';
    if (auto err = outcome.summary.get("error")) std::cerr << "run failed: " << *err << '\n';
    if (check && outcome.exit_code == bispec::kExitThreshold) std::cerr << "check failed, see summary.txt\n";
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return bispec::kExitRuntime;
  }
}
