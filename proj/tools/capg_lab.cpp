// capg-lab: experiment runner for the clipped-action policy gradient library.
//
//   capg-lab <variance|bandit|mdp|verify> [--config <path>] [--out <path>]
//            [--seed <int>] [--estimator pg|capg|both]
//
// Exit codes: 0 success / all checks pass, 1 a verification check failed,
// 2 configuration or output error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "capg/harness/config.hpp"
#include "capg/harness/experiments.hpp"
#include "capg/harness/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;

using capg::harness::ConfigError;
using capg::harness::Experiment;
using capg::harness::ExperimentConfig;

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

template <typename Runs>
void save_checkpoint(const ExperimentConfig& cfg, const Runs& runs) {
  if (cfg.checkpoint_path.empty()) return;
  std::ostringstream os;
  capg::harness::write_checkpoint(os, runs);
  emit(cfg.checkpoint_path, os.str());
}

int run(const ExperimentConfig& cfg) {
  std::ostringstream os;
  switch (cfg.experiment) {
    case Experiment::Variance:
      capg::harness::write_gradient_stats_csv(os, capg::harness::run_variance_grid(cfg));
      break;
    case Experiment::Bandit: {
      const auto runs = capg::harness::train_bandit(cfg);
      std::vector<capg::harness::CurvePoint> curve;
      for (const auto& r : runs) curve.insert(curve.end(), r.curve.begin(), r.curve.end());
      capg::harness::write_curve_csv(os, curve);
      save_checkpoint(cfg, runs);
      break;
    }
    case Experiment::Mdp: {
      const auto runs = capg::harness::train_mdp(cfg);
      std::vector<capg::harness::CurvePoint> curve;
      for (const auto& r : runs) curve.insert(curve.end(), r.curve.begin(), r.curve.end());
      capg::harness::write_curve_csv(os, curve);
      save_checkpoint(cfg, runs);
      break;
    }
    case Experiment::Verify: {
      const auto report = capg::harness::run_verification(cfg);
      capg::harness::write_verification_csv(os, report);
      emit(cfg.output_path, os.str());
      if (!report.all_passed()) {
        std::cerr << "capg-lab: " << report.failures() << " verification check(s) failed\n";
        return kExitCheckFailed;
      }
      return kExitOk;
    }
  }
  emit(cfg.output_path, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clipped-action policy gradient experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string estimator;

  for (const char* name : {"variance", "bandit", "mdp", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--out", out_path, "output CSV path (default: stdout)");
    sub->add_option("--seed", seed, "master seed for all derived streams");
    sub->add_option("--estimator", estimator, "pg, capg or both");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = capg::harness::load_config(config_path);
    cfg.experiment = capg::harness::parse_experiment(app.get_subcommands().front()->get_name());
    if (!out_path.empty()) cfg.output_path = out_path;
    if (seed) cfg.master_seed = *seed;
    if (!estimator.empty()) cfg.estimator = capg::harness::parse_estimator_selection(estimator);
    cfg.validate();
    return run(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "capg-lab: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "capg-lab: error: " << e.what() << '\n';
    return kExitConfigError;
  }
}
