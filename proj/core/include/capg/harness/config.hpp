#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "capg/envs.hpp"
#include "capg/estimator.hpp"

namespace capg::harness {

/// Bad key, bad value or violated invariant in an experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Variance, Bandit, Mdp, Verify };

std::string_view to_string(Experiment e) noexcept;
Experiment parse_experiment(std::string_view text);

enum class EstimatorSelection { PG, CAPG, Both };

std::vector<EstimatorKind> selected_estimators(EstimatorSelection sel);
EstimatorSelection parse_estimator_selection(std::string_view text);

struct ExperimentConfig {
  Experiment experiment = Experiment::Bandit;
  EstimatorSelection estimator = EstimatorSelection::Both;

  std::size_t d = 1;
  double init_mean = 0.0;
  double init_var = 1.0;
  double bound_low = -1.0;
  double bound_high = 1.0;
  std::size_t batch_size = 5;
  std::size_t updates = 5000;
  std::vector<std::int64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t master_seed = 0;
  BaselineMode baseline = BaselineMode::BatchMean;
  std::size_t smoothing_window = 100;
  double adam_lr = 1e-3;
  std::string output_path;
  std::string checkpoint_path;

  // variance
  std::size_t mc_batches = 10000;
  std::vector<double> grid_means = {0.0, 0.5, 1.0, 1.5};
  std::vector<double> grid_vars = {0.1, 1.0, 10.0};

  // mdp; batch_size counts episodes per update
  double gamma = 0.99;
  std::size_t horizon = 20;
  double init_state_std = 1.0;
  PenaltyMode penalty = PenaltyMode::None;
  double penalty_coef = 0.1;
  Weighting weighting = Weighting::GammaT;

  // verify
  std::size_t verify_samples = 10'000'000;
  std::size_t verify_fd_configs = 100;

  ActionBounds bounds() const { return ActionBounds::uniform(d, bound_low, bound_high); }
  IntegratorMdp mdp() const;

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

/// Flat `key = value` text; `#` starts a comment; lists are comma-separated.
/// Unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Applies a single key/value pair as if it came from a config file.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

}  // namespace capg::harness
