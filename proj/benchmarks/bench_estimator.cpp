#include <benchmark/benchmark.h>

#include "capg/envs.hpp"
#include "capg/estimator.hpp"
#include "capg/optim.hpp"
#include "capg/rng.hpp"

namespace {

void BM_EstimateBatch(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? capg::EstimatorKind::PG : capg::EstimatorKind::CAPG;
  const auto n = static_cast<std::size_t>(state.range(1));
  const capg::BanditEnv env(10);
  const auto params = capg::GaussianPolicyParams::isotropic(10, 0.5, 1.0);
  capg::Rng rng(3);
  std::vector<capg::BatchEntry> entries(n);
  for (auto& e : entries) {
    e.action = capg::sample_action(params, {}, rng);
    e.weight = capg::bandit_reward(env, e.action);
  }
  const auto batch = capg::apply_baseline(capg::Batch(entries), capg::BaselineMode::BatchMean);
  for (auto _ : state) benchmark::DoNotOptimize(capg::estimate(batch, params, env.bounds, kind));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
  state.SetLabel(std::string(capg::to_string(kind)));
}
BENCHMARK(BM_EstimateBatch)->Args({0, 5})->Args({1, 5})->Args({0, 1000})->Args({1, 1000});

void BM_Rollout(benchmark::State& state) {
  capg::IntegratorMdp env;
  const capg::GaussianPolicyParams params(capg::ParamLayout{1, 1}, {-0.5, 0.0, 0.0});
  capg::Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(capg::rollout(env, params, rng));
}
BENCHMARK(BM_Rollout);

void BM_AdamStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  capg::AdamState s = capg::AdamState::zeros(n);
  std::vector<double> params(n, 0.0), grad(n, 0.25);
  for (auto _ : state) {
    auto up = capg::adam_step(s, params, grad, capg::Direction::Ascend);
    benchmark::DoNotOptimize(up.params.data());
  }
}
BENCHMARK(BM_AdamStep)->Arg(2)->Arg(200);

}  // namespace
