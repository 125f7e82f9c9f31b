#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "capg/estimator.hpp"
#include "capg/harness/config.hpp"
#include "capg/optim.hpp"
#include "capg/policy.hpp"

namespace capg::harness {

/// Summary of repeated gradient estimates for one parameter at one grid point.
struct GradientStats {
  double mean = 0.0;
  double var = 0.0;
  std::size_t d = 1;
  std::string parameter;
  EstimatorKind estimator = EstimatorKind::PG;
  double grad_mean = 0.0;
  double grad_std = 0.0;
  std::size_t n_batches = 0;
  std::size_t batch_size = 0;
};

struct CurvePoint {
  std::int64_t seed = 0;
  std::size_t update_index = 0;
  double smoothed_reward = 0.0;
  EstimatorKind estimator = EstimatorKind::PG;
};

/// One (seed, estimator) training run.
struct TrainingRun {
  std::int64_t seed = 0;
  EstimatorKind estimator = EstimatorKind::PG;
  std::vector<CurvePoint> curve;
  GaussianPolicyParams final_params = GaussianPolicyParams::isotropic(1, 0.0, 1.0);
  AdamState adam;
};

/// Parameter names in flat layout order: mu_i for bandit policies,
/// w_i_j / b_i for affine heads, then logsigma_i.
std::vector<std::string> parameter_names(const ParamLayout& layout);

/// Stream key for one experiment cell. Runs are keyed by seed value, not
/// position, so reordering the seed list never changes a run.
std::uint64_t cell_stream(const ExperimentConfig& cfg, Experiment experiment, std::int64_t seed,
                          std::uint64_t cell);

/// Fixed policy per (mean, variance) grid point; mc_batches baselined
/// batches of batch_size, PG and CAPG evaluated on the same batches.
std::vector<GradientStats> run_variance_grid(const ExperimentConfig& cfg);

/// Bandit training curves: per seed and estimator, `updates` Adam-ascent
/// steps on batch-mean-baselined batches, reporting the trailing mean of the
/// last reward before each update.
std::vector<TrainingRun> train_bandit(const ExperimentConfig& cfg);
std::vector<CurvePoint> run_bandit_training(const ExperimentConfig& cfg);

/// Integrator MDP training with return-to-go weights. In preclip penalty mode
/// CAPG runs use the decomposed estimator.
std::vector<TrainingRun> train_mdp(const ExperimentConfig& cfg);
std::vector<CurvePoint> run_mdp_training(const ExperimentConfig& cfg);

/// Trailing mean over min(window, i + 1) values ending at i.
std::vector<double> trailing_mean(const std::vector<double>& values, std::size_t window);

void write_gradient_stats_csv(std::ostream& os, const std::vector<GradientStats>& rows);
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& rows);

/// Final policy and Adam moments of every run.
void write_checkpoint(std::ostream& os, const std::vector<TrainingRun>& runs);
std::vector<TrainingRun> read_checkpoint(std::istream& is);

}  // namespace capg::harness
