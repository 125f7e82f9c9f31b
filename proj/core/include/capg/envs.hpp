#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "capg/bounds.hpp"
#include "capg/estimator.hpp"
#include "capg/policy.hpp"
#include "capg/rng.hpp"

namespace capg {

/// Stateless continuum-armed bandit on [lower, upper]^d.
struct BanditEnv {
  explicit BanditEnv(std::size_t dim) : bounds(ActionBounds::uniform(dim, -1.0, 1.0)) {}
  explicit BanditEnv(ActionBounds b) : bounds(std::move(b)) {}

  std::size_t dim() const noexcept { return bounds.dim(); }

  ActionBounds bounds;
};

/// -(1/d) sum_i |clip(u)_i|. Depends on u only through clip(u).
double bandit_reward(const BanditEnv& env, std::span<const double> action);

/// -(c/d) sum_i u_i^2 on the raw action.
double preclip_penalty(std::span<const double> action, double coef);

/// bandit_reward + preclip_penalty on [-1, 1]^d.
double penalty_bandit_reward(std::span<const double> action, double coef);
double penalty_bandit_reward(const BanditEnv& env, std::span<const double> action, double coef);

enum class PenaltyMode { None, Clipped, Preclip };

std::string_view to_string(PenaltyMode mode) noexcept;
std::optional<PenaltyMode> parse_penalty_mode(std::string_view text) noexcept;

/// One-dimensional clipped integrator s' = s + clip(u) with reward
/// -s^2 - c * (clip(u)^2 | u^2 | 0) depending on the penalty mode.
struct IntegratorMdp {
  double gamma = 0.99;
  std::size_t horizon = 20;
  ActionBounds bounds = ActionBounds::uniform(1, -1.0, 1.0);
  double init_state_std = 1.0;
  PenaltyMode penalty = PenaltyMode::None;
  double penalty_coef = 0.0;

  /// Throws std::invalid_argument on gamma outside (0, 1], zero horizon,
  /// non-1-D bounds, non-positive init_state_std or negative coefficient.
  void validate() const;
};

struct StepResult {
  double next_state;
  double reward;
};

StepResult mdp_step(const IntegratorMdp& env, double state, double action);

struct TrajectoryStep {
  std::vector<double> state;
  std::vector<double> pre_clip_action;
  std::vector<double> clipped_action;
  double reward = 0.0;
  double discounted_weight = 1.0;  // gamma^t
  double return_to_go = 0.0;
  double next_return_to_go = 0.0;
};

struct Trajectory {
  double gamma = 1.0;
  std::vector<TrajectoryStep> steps;

  /// Sum of rewards, undiscounted.
  double total_reward() const;
};

/// s0 ~ N(0, init_state_std^2), then horizon policy steps.
Trajectory rollout(const IntegratorMdp& env, const GaussianPolicyParams& params, Rng& rng);
Trajectory rollout_from(const IntegratorMdp& env, const GaussianPolicyParams& params,
                        double initial_state, Rng& rng);

enum class Weighting { GammaT, Flat };

std::string_view to_string(Weighting weighting) noexcept;
std::optional<Weighting> parse_weighting(std::string_view text) noexcept;

/// Entries (s_t, u_t, w_t) with w_t = gamma^t G_t (GammaT) or G_t (Flat),
/// then the baseline applied across every entry of every trajectory.
Batch trajectory_to_batch(const Trajectory& traj, BaselineMode baseline, Weighting weighting);
Batch trajectories_to_batch(std::span<const Trajectory> trajs, BaselineMode baseline,
                            Weighting weighting);

/// Splits each return into the immediate reward and the discounted
/// continuation gamma * G_{t+1}, both scaled by the step weight. The batch
/// baseline (mean of full weights) is subtracted from the continuation part.
std::vector<DecomposedEntry> trajectories_to_decomposed(std::span<const Trajectory> trajs,
                                                        BaselineMode baseline,
                                                        Weighting weighting);

}  // namespace capg
