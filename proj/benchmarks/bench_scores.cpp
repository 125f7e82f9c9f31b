#include <benchmark/benchmark.h>

#include <vector>

#include "capg/gauss.hpp"
#include "capg/policy.hpp"
#include "capg/rng.hpp"

namespace {

void BM_LogCdf(benchmark::State& state) {
  const double z = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(capg::gauss::std_normal_log_cdf(z));
}
BENCHMARK(BM_LogCdf)->Arg(-20)->Arg(-3)->Arg(0)->Arg(4);

void BM_InvMills(benchmark::State& state) {
  double z = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(capg::gauss::inv_mills_lower(z));
    z = z > 8.0 ? -8.0 : z + 0.01;
  }
}
BENCHMARK(BM_InvMills);

std::vector<std::vector<double>> actions(std::size_t dim, std::size_t count) {
  capg::Rng rng(1);
  std::vector<std::vector<double>> out(count, std::vector<double>(dim));
  for (auto& u : out) {
    for (auto& x : u) x = 1.5 * rng.normal();
  }
  return out;
}

template <bool Clipped>
void BM_Score(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto params = capg::GaussianPolicyParams::isotropic(dim, 0.2, 1.0);
  const auto bounds = capg::ActionBounds::uniform(dim, -1.0, 1.0);
  const auto us = actions(dim, 256);
  std::vector<double> out(params.layout().size());
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& u = us[i++ % us.size()];
    if constexpr (Clipped) {
      capg::score_capg_into(params, {}, u, bounds, out);
    } else {
      capg::score_pg_into(params, {}, u, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Score<false>)->Name("BM_ScorePg")->Arg(1)->Arg(10)->Arg(100);
BENCHMARK(BM_Score<true>)->Name("BM_ScoreCapg")->Arg(1)->Arg(10)->Arg(100);

void BM_SampleClipped(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto params = capg::GaussianPolicyParams::isotropic(dim, 0.0, 1.0);
  const auto bounds = capg::ActionBounds::uniform(dim, -1.0, 1.0);
  capg::Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(capg::sample_clipped(params, {}, bounds, rng));
}
BENCHMARK(BM_SampleClipped)->Arg(1)->Arg(100);

}  // namespace
