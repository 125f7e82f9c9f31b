#include "capg/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "capg/envs.hpp"
#include "capg/format.hpp"
#include "capg/rng.hpp"
#include "capg/stats.hpp"

namespace capg::harness {
namespace {

constexpr std::uint64_t kind_code(EstimatorKind kind) { return kind == EstimatorKind::PG ? 1 : 2; }

// Optimizer steps could push log_std through the construction floor; project
// back onto it instead.
GaussianPolicyParams project(const GaussianPolicyParams& like, std::vector<double> flat) {
  const ParamLayout& layout = like.layout();
  for (std::size_t i = 0; i < layout.action_dim; ++i) {
    double& ls = flat[layout.log_std_index(i)];
    ls = std::max(ls, GaussianPolicyParams::kMinLogStd);
  }
  return like.with_flat(std::move(flat));
}

GaussianPolicyParams initial_bandit_policy(const ExperimentConfig& cfg, double mean,
                                           double variance) {
  std::vector<double> flat(cfg.d, mean);
  flat.resize(2 * cfg.d, std::max(0.5 * std::log(variance), GaussianPolicyParams::kMinLogStd));
  return GaussianPolicyParams(ParamLayout{cfg.d, 0}, std::move(flat));
}

GaussianPolicyParams initial_mdp_policy(const ExperimentConfig& cfg) {
  return GaussianPolicyParams(
      ParamLayout{1, 1},
      {0.0, cfg.init_mean, std::max(0.5 * std::log(cfg.init_var), GaussianPolicyParams::kMinLogStd)});
}

std::vector<CurvePoint> make_curve(std::int64_t seed, EstimatorKind kind,
                                   const std::vector<double>& rewards, std::size_t window) {
  const std::vector<double> smoothed = trailing_mean(rewards, window);
  std::vector<CurvePoint> curve;
  curve.reserve(smoothed.size());
  for (std::size_t t = 0; t < smoothed.size(); ++t) curve.push_back({seed, t + 1, smoothed[t], kind});
  return curve;
}

std::vector<CurvePoint> flatten_curves(const std::vector<TrainingRun>& runs) {
  std::vector<CurvePoint> out;
  for (const auto& run : runs) out.insert(out.end(), run.curve.begin(), run.curve.end());
  return out;
}

}  // namespace

std::vector<std::string> parameter_names(const ParamLayout& layout) {
  std::vector<std::string> names;
  names.reserve(layout.size());
  for (std::size_t i = 0; i < layout.action_dim; ++i) {
    if (layout.state_dim == 0) {
      names.push_back("mu_" + std::to_string(i));
      continue;
    }
    for (std::size_t j = 0; j < layout.state_dim; ++j) {
      names.push_back("w_" + std::to_string(i) + "_" + std::to_string(j));
    }
    names.push_back("b_" + std::to_string(i));
  }
  for (std::size_t i = 0; i < layout.action_dim; ++i) names.push_back("logsigma_" + std::to_string(i));
  return names;
}

std::uint64_t cell_stream(const ExperimentConfig& cfg, Experiment experiment, std::int64_t seed,
                          std::uint64_t cell) {
  return derive_stream(cfg.master_seed, {static_cast<std::uint64_t>(experiment) + 1,
                                         static_cast<std::uint64_t>(seed), cell});
}

std::vector<double> trailing_mean(const std::vector<double>& values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("trailing_mean: window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    const std::size_t begin = t + 1 >= window ? t + 1 - window : 0;
    CompensatedSum sum;
    for (std::size_t k = begin; k <= t; ++k) sum.add(values[k]);
    out[t] = sum.value() / static_cast<double>(t + 1 - begin);
  }
  return out;
}

std::vector<GradientStats> run_variance_grid(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto kinds = selected_estimators(cfg.estimator);
  const BanditEnv env(cfg.bounds());
  std::vector<GradientStats> rows;
  std::uint64_t cell = 0;
  for (const double mean : cfg.grid_means) {
    for (const double var : cfg.grid_vars) {
      const GaussianPolicyParams params = initial_bandit_policy(cfg, mean, var);
      const auto names = parameter_names(params.layout());
      // Shared stream: every estimator sees the same batches.
      Rng rng(cell_stream(cfg, Experiment::Variance, cfg.seeds.front(), cell++));
      std::vector<VectorMoments> moments(kinds.size(), VectorMoments(params.layout().size()));
      std::vector<BatchEntry> entries(cfg.batch_size);
      for (std::size_t b = 0; b < cfg.mc_batches; ++b) {
        for (auto& e : entries) {
          e.action = sample_action(params, {}, rng);
          e.weight = bandit_reward(env, e.action);
        }
        const Batch batch = apply_baseline(Batch(entries), cfg.baseline);
        for (std::size_t k = 0; k < kinds.size(); ++k) {
          moments[k].add(estimate(batch, params, env.bounds, kinds[k]).flat());
        }
      }
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        for (std::size_t p = 0; p < names.size(); ++p) {
          rows.push_back({mean, var, cfg.d, names[p], kinds[k], moments[k][p].mean(),
                          moments[k][p].stddev(), cfg.mc_batches, cfg.batch_size});
        }
      }
    }
  }
  return rows;
}

std::vector<TrainingRun> train_bandit(const ExperimentConfig& cfg) {
  cfg.validate();
  const BanditEnv env(cfg.bounds());
  std::vector<TrainingRun> runs;
  for (const auto seed : cfg.seeds) {
    for (const auto kind : selected_estimators(cfg.estimator)) {
      Rng rng(cell_stream(cfg, Experiment::Bandit, seed, kind_code(kind)));
      GaussianPolicyParams params = initial_bandit_policy(cfg, cfg.init_mean, cfg.init_var);
      AdamState adam = AdamState::zeros(params.layout().size(), AdamHyper{.lr = cfg.adam_lr});
      std::vector<double> last_rewards;
      last_rewards.reserve(cfg.updates);
      std::vector<BatchEntry> entries(cfg.batch_size);
      for (std::size_t t = 0; t < cfg.updates; ++t) {
        for (auto& e : entries) {
          e.action = sample_action(params, {}, rng);
          e.weight = bandit_reward(env, e.action);
        }
        last_rewards.push_back(entries.back().weight);
        const Batch batch = apply_baseline(Batch(entries), cfg.baseline);
        const GradientEstimate grad = estimate(batch, params, env.bounds, kind);
        AdamUpdate step = adam_step(adam, params.flat(), grad.flat(), Direction::Ascend);
        adam = std::move(step.state);
        params = project(params, std::move(step.params));
      }
      runs.push_back({seed, kind, make_curve(seed, kind, last_rewards, cfg.smoothing_window),
                      params, adam});
    }
  }
  return runs;
}

std::vector<CurvePoint> run_bandit_training(const ExperimentConfig& cfg) {
  return flatten_curves(train_bandit(cfg));
}

std::vector<TrainingRun> train_mdp(const ExperimentConfig& cfg) {
  cfg.validate();
  const IntegratorMdp env = cfg.mdp();
  std::vector<TrainingRun> runs;
  for (const auto seed : cfg.seeds) {
    for (const auto kind : selected_estimators(cfg.estimator)) {
      Rng rng(cell_stream(cfg, Experiment::Mdp, seed, kind_code(kind)));
      GaussianPolicyParams params = initial_mdp_policy(cfg);
      AdamState adam = AdamState::zeros(params.layout().size(), AdamHyper{.lr = cfg.adam_lr});
      std::vector<double> last_returns;
      last_returns.reserve(cfg.updates);
      std::vector<Trajectory> episodes(cfg.batch_size);
      for (std::size_t t = 0; t < cfg.updates; ++t) {
        for (auto& ep : episodes) ep = rollout(env, params, rng);
        last_returns.push_back(episodes.back().total_reward());
        GradientEstimate grad(params.layout());
        if (kind == EstimatorKind::CAPG && env.penalty == PenaltyMode::Preclip) {
          const auto entries = trajectories_to_decomposed(episodes, cfg.baseline, cfg.weighting);
          grad = estimate_decomposed(entries, params, env.bounds);
        } else {
          const Batch batch = trajectories_to_batch(episodes, cfg.baseline, cfg.weighting);
          grad = estimate(batch, params, env.bounds, kind);
        }
        AdamUpdate step = adam_step(adam, params.flat(), grad.flat(), Direction::Ascend);
        adam = std::move(step.state);
        params = project(params, std::move(step.params));
      }
      runs.push_back({seed, kind, make_curve(seed, kind, last_returns, cfg.smoothing_window),
                      params, adam});
    }
  }
  return runs;
}

std::vector<CurvePoint> run_mdp_training(const ExperimentConfig& cfg) {
  return flatten_curves(train_mdp(cfg));
}

void write_gradient_stats_csv(std::ostream& os, const std::vector<GradientStats>& rows) {
  os << "mean,var,d,parameter,estimator,grad_mean,grad_std,n_batches,batch_size\n";
  for (const auto& r : rows) {
    os << format_real(r.mean) << ',' << format_real(r.var) << ',' << r.d << ',' << r.parameter
       << ',' << to_string(r.estimator) << ',' << format_real(r.grad_mean) << ','
       << format_real(r.grad_std) << ',' << r.n_batches << ',' << r.batch_size << '\n';
  }
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& rows) {
  os << "seed,update_index,smoothed_reward,estimator\n";
  for (const auto& r : rows) {
    os << r.seed << ',' << r.update_index << ',' << format_real(r.smoothed_reward) << ','
       << to_string(r.estimator) << '\n';
  }
}

void write_checkpoint(std::ostream& os, const std::vector<TrainingRun>& runs) {
  os << "capg-checkpoint 1 " << runs.size() << '\n';
  for (const auto& run : runs) {
    const ParamLayout& layout = run.final_params.layout();
    os << "run " << run.seed << ' ' << to_string(run.estimator) << ' ' << layout.action_dim << ' '
       << layout.state_dim << '\n';
    const auto flat = run.final_params.flat();
    for (std::size_t p = 0; p < flat.size(); ++p) {
      os << (p == 0 ? "" : " ") << format_real(flat[p]);
    }
    os << '\n';
    write_adam_state(os, run.adam);
  }
}

std::vector<TrainingRun> read_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(is >> magic >> version >> count) || magic != "capg-checkpoint" || version != 1) {
    throw std::runtime_error("read_checkpoint: not a checkpoint file");
  }
  std::vector<TrainingRun> runs;
  for (std::size_t r = 0; r < count; ++r) {
    std::string tag, est;
    TrainingRun run;
    ParamLayout layout;
    if (!(is >> tag >> run.seed >> est >> layout.action_dim >> layout.state_dim) || tag != "run") {
      throw std::runtime_error("read_checkpoint: malformed run header");
    }
    const auto kind = parse_estimator_kind(est);
    if (!kind) throw std::runtime_error("read_checkpoint: unknown estimator '" + est + "'");
    run.estimator = *kind;
    std::vector<double> flat(layout.size());
    for (auto& v : flat) {
      std::string text;
      if (!(is >> text)) throw std::runtime_error("read_checkpoint: truncated parameters");
      v = parse_real(text);
    }
    run.final_params = GaussianPolicyParams(layout, std::move(flat));
    run.adam = read_adam_state(is);
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace capg::harness
