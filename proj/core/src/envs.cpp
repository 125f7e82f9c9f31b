#include "capg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "capg/stats.hpp"

namespace capg {
namespace {

double clip_scalar(double u, double lo, double hi) { return std::max(std::min(u, hi), lo); }

double step_weight(const TrajectoryStep& step, Weighting weighting) {
  return weighting == Weighting::GammaT ? step.discounted_weight : 1.0;
}

}  // namespace

double bandit_reward(const BanditEnv& env, std::span<const double> action) {
  if (action.size() != env.dim()) throw std::invalid_argument("bandit_reward: wrong dimension");
  CompensatedSum sum;
  for (std::size_t i = 0; i < action.size(); ++i) {
    sum.add(std::abs(clip_scalar(action[i], env.bounds.lower(i), env.bounds.upper(i))));
  }
  return -sum.value() / static_cast<double>(action.size());
}

double preclip_penalty(std::span<const double> action, double coef) {
  if (coef < 0.0) throw std::invalid_argument("preclip_penalty: coefficient must be >= 0");
  CompensatedSum sum;
  for (const double u : action) sum.add(u * u);
  return -coef * sum.value() / static_cast<double>(action.size());
}

double penalty_bandit_reward(std::span<const double> action, double coef) {
  return penalty_bandit_reward(BanditEnv(action.size()), action, coef);
}

double penalty_bandit_reward(const BanditEnv& env, std::span<const double> action, double coef) {
  return bandit_reward(env, action) + preclip_penalty(action, coef);
}

std::string_view to_string(PenaltyMode mode) noexcept {
  switch (mode) {
    case PenaltyMode::None:
      return "none";
    case PenaltyMode::Clipped:
      return "clipped";
    case PenaltyMode::Preclip:
      return "preclip";
  }
  return "none";
}

std::optional<PenaltyMode> parse_penalty_mode(std::string_view text) noexcept {
  if (text == "none") return PenaltyMode::None;
  if (text == "clipped") return PenaltyMode::Clipped;
  if (text == "preclip") return PenaltyMode::Preclip;
  return std::nullopt;
}

void IntegratorMdp::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("IntegratorMdp: gamma must be in (0, 1]");
  if (horizon < 1) throw std::invalid_argument("IntegratorMdp: horizon must be >= 1");
  if (bounds.dim() != 1) throw std::invalid_argument("IntegratorMdp: bounds must be 1-D");
  if (!(init_state_std > 0.0) || !std::isfinite(init_state_std)) {
    throw std::invalid_argument("IntegratorMdp: init_state_std must be positive");
  }
  if (!(penalty_coef >= 0.0)) throw std::invalid_argument("IntegratorMdp: penalty_coef must be >= 0");
}

StepResult mdp_step(const IntegratorMdp& env, double state, double action) {
  if (!std::isfinite(state)) throw std::invalid_argument("mdp_step: non-finite state");
  const double a = clip_scalar(action, env.bounds.lower(0), env.bounds.upper(0));
  double reward = -state * state;
  switch (env.penalty) {
    case PenaltyMode::None:
      break;
    case PenaltyMode::Clipped:
      reward -= env.penalty_coef * a * a;
      break;
    case PenaltyMode::Preclip:
      reward -= env.penalty_coef * action * action;
      break;
  }
  return {state + a, reward};
}

double Trajectory::total_reward() const {
  CompensatedSum sum;
  for (const auto& s : steps) sum.add(s.reward);
  return sum.value();
}

Trajectory rollout(const IntegratorMdp& env, const GaussianPolicyParams& params, Rng& rng) {
  const double s0 = env.init_state_std * rng.normal();
  return rollout_from(env, params, s0, rng);
}

Trajectory rollout_from(const IntegratorMdp& env, const GaussianPolicyParams& params,
                        double initial_state, Rng& rng) {
  env.validate();
  if (params.action_dim() != 1 || params.state_dim() != 1) {
    throw std::invalid_argument("rollout: integrator needs a 1-D policy over a 1-D state");
  }
  Trajectory traj;
  traj.gamma = env.gamma;
  traj.steps.reserve(env.horizon);
  double s = initial_state;
  double discount = 1.0;
  for (std::size_t t = 0; t < env.horizon; ++t) {
    TrajectoryStep step;
    step.state = {s};
    step.pre_clip_action = sample_action(params, step.state, rng);
    step.clipped_action = clip_action(step.pre_clip_action, env.bounds);
    const StepResult r = mdp_step(env, s, step.pre_clip_action[0]);
    step.reward = r.reward;
    step.discounted_weight = discount;
    traj.steps.push_back(std::move(step));
    s = r.next_state;
    discount *= env.gamma;
  }
  double next = 0.0;
  for (auto it = traj.steps.rbegin(); it != traj.steps.rend(); ++it) {
    it->next_return_to_go = next;
    it->return_to_go = it->reward + env.gamma * next;
    next = it->return_to_go;
  }
  return traj;
}

std::string_view to_string(Weighting weighting) noexcept {
  return weighting == Weighting::GammaT ? "gamma_t" : "flat";
}

std::optional<Weighting> parse_weighting(std::string_view text) noexcept {
  if (text == "gamma_t") return Weighting::GammaT;
  if (text == "flat") return Weighting::Flat;
  return std::nullopt;
}

Batch trajectory_to_batch(const Trajectory& traj, BaselineMode baseline, Weighting weighting) {
  return trajectories_to_batch(std::span<const Trajectory>(&traj, 1), baseline, weighting);
}

Batch trajectories_to_batch(std::span<const Trajectory> trajs, BaselineMode baseline,
                            Weighting weighting) {
  std::vector<BatchEntry> entries;
  for (const auto& traj : trajs) {
    for (const auto& step : traj.steps) {
      entries.push_back({step.state, step.pre_clip_action, step_weight(step, weighting) * step.return_to_go});
    }
  }
  return apply_baseline(Batch(std::move(entries)), baseline);
}

std::vector<DecomposedEntry> trajectories_to_decomposed(std::span<const Trajectory> trajs,
                                                        BaselineMode baseline,
                                                        Weighting weighting) {
  std::vector<DecomposedEntry> entries;
  CompensatedSum total;
  for (const auto& traj : trajs) {
    for (const auto& step : traj.steps) {
      const double w = step_weight(step, weighting);
      DecomposedEntry e{step.state, step.pre_clip_action, w * step.reward,
                        w * traj.gamma * step.next_return_to_go};
      total.add(w * step.return_to_go);
      entries.push_back(std::move(e));
    }
  }
  if (entries.empty()) throw std::invalid_argument("trajectories_to_decomposed: no steps");
  if (baseline == BaselineMode::BatchMean) {
    const double b = total.value() / static_cast<double>(entries.size());
    for (auto& e : entries) e.continuation_weight -= b;
  }
  return entries;
}

}  // namespace capg
