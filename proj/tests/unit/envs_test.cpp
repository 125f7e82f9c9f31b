#include "capg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "capg/rng.hpp"

namespace capg {
namespace {

constexpr double kMinLogStd = GaussianPolicyParams::kMinLogStd;

GaussianPolicyParams deterministic_zero_policy() {
  return GaussianPolicyParams(ParamLayout{1, 1}, {0.0, 0.0, kMinLogStd});
}

std::vector<double> v(std::initializer_list<double> x) { return x; }

TEST(ClipAction, Examples) {
  const auto b1 = ActionBounds::uniform(1, -1.0, 1.0);
  EXPECT_EQ(clip_action(v({1.5}), b1), v({1.0}));
  EXPECT_EQ(clip_action(v({0.3}), b1), v({0.3}));
  EXPECT_EQ(clip_action(v({-2, 0, 2}), ActionBounds::uniform(3, -1.0, 1.0)), v({-1, 0, 1}));
}

TEST(ClipAction, Idempotent) {
  Rng rng(1);
  const ActionBounds b({-1.0, 0.0}, {0.5, 3.0});
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> u = {3 * rng.normal(), 3 * rng.normal()};
    const auto once = clip_action(u, b);
    ASSERT_EQ(clip_action(once, b), once);
    for (std::size_t j = 0; j < 2; ++j) {
      ASSERT_GE(once[j], b.lower(j));
      ASSERT_LE(once[j], b.upper(j));
    }
  }
}

TEST(BanditReward, Examples) {
  EXPECT_EQ(bandit_reward(BanditEnv(1), v({0.0})), 0.0);
  EXPECT_EQ(bandit_reward(BanditEnv(4), v({0, 0, 0, 0})), 0.0);
  EXPECT_EQ(bandit_reward(BanditEnv(2), v({1, -1})), -1.0);
  EXPECT_EQ(bandit_reward(BanditEnv(1), v({2.5})), -1.0);
  EXPECT_EQ(bandit_reward(BanditEnv(1), v({2.5})), bandit_reward(BanditEnv(1), v({1.0})));
}

TEST(BanditReward, ClippingInvarianceAndCeiling) {
  Rng rng(2);
  const BanditEnv env(3);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> u = {2 * rng.normal(), 2 * rng.normal(), 2 * rng.normal()};
    const double r = bandit_reward(env, u);
    ASSERT_EQ(r, bandit_reward(env, clip_action(u, env.bounds)));
    ASSERT_LT(r, 0.0);
  }
  EXPECT_EQ(bandit_reward(env, v({0, -0.0, 0})), 0.0);
}

TEST(PenaltyBanditReward, Examples) {
  EXPECT_EQ(penalty_bandit_reward(v({0.0}), 0.1), 0.0);
  EXPECT_NEAR(penalty_bandit_reward(v({2.0}), 0.1), -1.4, 1e-15);
  Rng rng(3);
  const BanditEnv env(2);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> u = {2 * rng.normal(), 2 * rng.normal()};
    ASSERT_EQ(penalty_bandit_reward(env, u, 0.0), bandit_reward(env, u));
  }
}

TEST(PenaltyMode, Parse) {
  EXPECT_EQ(parse_penalty_mode("preclip"), PenaltyMode::Preclip);
  EXPECT_EQ(parse_penalty_mode("clipped"), PenaltyMode::Clipped);
  EXPECT_EQ(parse_penalty_mode("none"), PenaltyMode::None);
  EXPECT_FALSE(parse_penalty_mode("raw").has_value());
  EXPECT_EQ(parse_weighting("gamma_t"), Weighting::GammaT);
  EXPECT_EQ(parse_weighting("flat"), Weighting::Flat);
  EXPECT_FALSE(parse_weighting("gamma").has_value());
}

TEST(MdpStep, Examples) {
  IntegratorMdp none;
  auto r = mdp_step(none, 0.0, 0.0);
  EXPECT_EQ(r.next_state, 0.0);
  EXPECT_EQ(r.reward, 0.0);
  r = mdp_step(none, 1.0, -3.0);
  EXPECT_EQ(r.next_state, 0.0);
  EXPECT_EQ(r.reward, -1.0);
  IntegratorMdp pre;
  pre.penalty = PenaltyMode::Preclip;
  pre.penalty_coef = 0.1;
  r = mdp_step(pre, 0.0, 2.0);
  EXPECT_EQ(r.next_state, 1.0);
  EXPECT_NEAR(r.reward, -0.4, 1e-15);
  IntegratorMdp clipped = pre;
  clipped.penalty = PenaltyMode::Clipped;
  EXPECT_NEAR(mdp_step(clipped, 0.0, 2.0).reward, -0.1, 1e-15);
}

TEST(MdpStep, DynamicsDependOnClippedActionOnly) {
  Rng rng(4);
  for (const auto mode : {PenaltyMode::None, PenaltyMode::Clipped, PenaltyMode::Preclip}) {
    IntegratorMdp env;
    env.penalty = mode;
    env.penalty_coef = 0.3;
    for (int i = 0; i < 1000; ++i) {
      const double s = 3 * rng.normal(), u = 3 * rng.normal();
      const auto a = mdp_step(env, s, u);
      const auto b = mdp_step(env, s, std::clamp(u, -1.0, 1.0));
      ASSERT_EQ(a.next_state, b.next_state);
      if (mode != PenaltyMode::Preclip) ASSERT_EQ(a.reward, b.reward);
    }
  }
}

TEST(IntegratorMdp, Validation) {
  IntegratorMdp env;
  env.horizon = 0;
  EXPECT_THROW(env.validate(), std::invalid_argument);
  env = {};
  env.gamma = 0.0;
  EXPECT_THROW(env.validate(), std::invalid_argument);
  env = {};
  env.gamma = 1.0;
  EXPECT_NO_THROW(env.validate());
  env.init_state_std = 0.0;
  EXPECT_THROW(env.validate(), std::invalid_argument);
  env = {};
  env.penalty_coef = -1.0;
  EXPECT_THROW(env.validate(), std::invalid_argument);
}

TEST(Rollout, HorizonOne) {
  IntegratorMdp env;
  env.horizon = 1;
  Rng rng(5);
  const auto traj = rollout(env, GaussianPolicyParams(ParamLayout{1, 1}, {-0.5, 0.1, 0.0}), rng);
  ASSERT_EQ(traj.steps.size(), 1u);
  EXPECT_EQ(traj.steps[0].return_to_go, traj.steps[0].reward);
  EXPECT_EQ(traj.steps[0].next_return_to_go, 0.0);
  EXPECT_EQ(traj.steps[0].discounted_weight, 1.0);
}

TEST(Rollout, ConstantRewardTelescopes) {
  IntegratorMdp env;
  env.gamma = 1.0;
  env.horizon = 3;
  Rng rng(6);
  const auto traj = rollout_from(env, deterministic_zero_policy(), 1.0, rng);
  ASSERT_EQ(traj.steps.size(), 3u);
  EXPECT_NEAR(traj.steps[0].return_to_go, -3.0, 1e-6);
  EXPECT_NEAR(traj.steps[1].return_to_go, -2.0, 1e-6);
  EXPECT_NEAR(traj.steps[2].return_to_go, -1.0, 1e-6);
}

TEST(Rollout, TwoStepDeterministicReturn) {
  IntegratorMdp env;
  env.horizon = 2;
  Rng rng(7);
  const auto traj = rollout_from(env, deterministic_zero_policy(), 1.0, rng);
  EXPECT_NEAR(traj.steps[0].reward, -1.0, 1e-6);
  EXPECT_NEAR(traj.steps[1].reward, -1.0, 1e-6);
  EXPECT_NEAR(traj.steps[0].return_to_go, -1.99, 1e-6);
  EXPECT_NEAR(traj.total_reward(), -2.0, 1e-6);
}

// Property: every recorded trajectory satisfies the return recursion and the
// clipping contract exactly.
TEST(Rollout, ReturnRecursionAndClipping) {
  Rng rng(8);
  for (const double gamma : {0.5, 0.99, 1.0}) {
    IntegratorMdp env;
    env.gamma = gamma;
    env.horizon = 25;
    env.init_state_std = 2.0;
    env.penalty = PenaltyMode::Preclip;
    env.penalty_coef = 0.1;
    const GaussianPolicyParams p(ParamLayout{1, 1}, {-0.8, 0.1, std::log(0.7)});
    for (int i = 0; i < 50; ++i) {
      const auto traj = rollout(env, p, rng);
      ASSERT_EQ(traj.steps.size(), 25u);
      ASSERT_EQ(traj.steps.back().next_return_to_go, 0.0);
      double weight = 1.0;
      for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const auto& st = traj.steps[t];
        ASSERT_EQ(st.clipped_action, clip_action(st.pre_clip_action, env.bounds));
        const double next = t + 1 < traj.steps.size() ? traj.steps[t + 1].return_to_go : 0.0;
        ASSERT_EQ(st.next_return_to_go, next);
        ASSERT_EQ(st.return_to_go, st.reward + gamma * next);
        ASSERT_DOUBLE_EQ(st.discounted_weight, weight);
        if (t + 1 < traj.steps.size()) {
          ASSERT_EQ(traj.steps[t + 1].state[0], st.state[0] + st.clipped_action[0]);
        }
        weight *= gamma;
      }
    }
  }
}

Trajectory two_step(double gamma, double g0, double g1) {
  Trajectory t;
  t.gamma = gamma;
  t.steps.resize(2);
  t.steps[0] = {{0.0}, {0.1}, {0.1}, g0 - gamma * g1, 1.0, g0, g1};
  t.steps[1] = {{0.1}, {0.2}, {0.2}, g1, gamma, g1, 0.0};
  return t;
}

TEST(TrajectoryToBatch, Weighting) {
  const auto flat = trajectory_to_batch(two_step(0.5, 4, 2), BaselineMode::None, Weighting::Flat);
  const auto gt = trajectory_to_batch(two_step(0.5, 4, 2), BaselineMode::None, Weighting::GammaT);
  EXPECT_EQ(flat.entries()[0].weight, 4.0);
  EXPECT_EQ(flat.entries()[1].weight, 2.0);
  EXPECT_EQ(gt.entries()[0].weight, 4.0);
  EXPECT_EQ(gt.entries()[1].weight, 1.0);
  const auto base = trajectory_to_batch(two_step(0.5, 4, 2), BaselineMode::BatchMean, Weighting::GammaT);
  EXPECT_EQ(base.entries()[0].weight, 1.5);
  EXPECT_EQ(base.entries()[1].weight, -1.5);
  EXPECT_EQ(base.entries()[1].action, v({0.2}));
}

TEST(TrajectoryToBatch, GammaOneAndSingleStep) {
  Rng rng(9);
  IntegratorMdp env;
  env.gamma = 1.0;
  const GaussianPolicyParams p(ParamLayout{1, 1}, {-0.5, 0.0, 0.0});
  const auto traj = rollout(env, p, rng);
  const auto a = trajectory_to_batch(traj, BaselineMode::None, Weighting::Flat);
  const auto b = trajectory_to_batch(traj, BaselineMode::None, Weighting::GammaT);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.entries()[i].weight, b.entries()[i].weight);

  env.horizon = 1;
  env.gamma = 0.9;
  const auto one = rollout(env, p, rng);
  const auto batch = trajectory_to_batch(one, BaselineMode::None, Weighting::GammaT);
  ASSERT_EQ(batch.size(), 1u);
  EXPECT_EQ(batch.entries()[0].weight, one.steps[0].reward);
}

TEST(TrajectoriesToDecomposed, SplitsImmediateAndContinuation) {
  const std::vector<Trajectory> trajs = {two_step(0.5, 4, 2)};
  const auto dec = trajectories_to_decomposed(trajs, BaselineMode::BatchMean, Weighting::Flat);
  ASSERT_EQ(dec.size(), 2u);
  // Flat weights (4, 2), baseline 3 taken off the continuation part only.
  EXPECT_EQ(dec[0].immediate_reward, 3.0);
  EXPECT_EQ(dec[0].continuation_weight, 0.5 * 2.0 - 3.0);
  EXPECT_EQ(dec[1].immediate_reward, 2.0);
  EXPECT_EQ(dec[1].continuation_weight, -3.0);
  const auto raw = trajectories_to_decomposed(trajs, BaselineMode::None, Weighting::Flat);
  EXPECT_EQ(raw[0].immediate_reward + raw[0].continuation_weight, 4.0);
  EXPECT_EQ(raw[1].immediate_reward + raw[1].continuation_weight, 2.0);
}

}  // namespace
}  // namespace capg
