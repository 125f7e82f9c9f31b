#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "capg/format.hpp"
#include "capg/harness/config.hpp"
#include "capg/harness/experiments.hpp"
#include "capg/harness/verification.hpp"
#include "capg/rng.hpp"
#include "capg/stats.hpp"
#include "oracle.hpp"

namespace capg::harness {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

template <typename Rows, typename Writer>
std::string csv(const Rows& rows, Writer write) {
  std::ostringstream os;
  write(os, rows);
  return os.str();
}

std::map<std::pair<std::string, EstimatorKind>, GradientStats> by_param(
    const std::vector<GradientStats>& rows, double mean, double var) {
  std::map<std::pair<std::string, EstimatorKind>, GradientStats> out;
  for (const auto& r : rows) {
    if (r.mean == mean && r.var == var) out[{r.parameter, r.estimator}] = r;
  }
  return out;
}

TEST(Config, ParsesKeysCommentsAndLists) {
  const auto cfg = parse(
      "# bandit sweep\n"
      "experiment = bandit\n"
      "estimator=capg\n"
      "  d = 3   # inline\n"
      "init_mean = -0.5\n"
      "seeds = 4, 2, 7\n"
      "grid_vars = 0.1,1e1\n"
      "baseline = none\n"
      "penalty = preclip\n"
      "weighting = flat\n"
      "\n");
  EXPECT_EQ(cfg.experiment, Experiment::Bandit);
  EXPECT_EQ(cfg.estimator, EstimatorSelection::CAPG);
  EXPECT_EQ(cfg.d, 3u);
  EXPECT_EQ(cfg.init_mean, -0.5);
  EXPECT_EQ(cfg.seeds, (std::vector<std::int64_t>{4, 2, 7}));
  EXPECT_EQ(cfg.grid_vars, (std::vector<double>{0.1, 10.0}));
  EXPECT_EQ(cfg.baseline, BaselineMode::None);
  EXPECT_EQ(cfg.penalty, PenaltyMode::Preclip);
  EXPECT_EQ(cfg.weighting, Weighting::Flat);
  EXPECT_EQ(cfg.batch_size, 5u);
  EXPECT_EQ(cfg.updates, 5000u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("colour = red\n"), ConfigError);
  EXPECT_THROW(parse("d 3\n"), ConfigError);
  EXPECT_THROW(parse("d =\n"), ConfigError);
  EXPECT_THROW(parse("= 3\n"), ConfigError);
  EXPECT_THROW(parse("d = three\n"), ConfigError);
  EXPECT_THROW(parse("d = -1\n"), ConfigError);
  EXPECT_THROW(parse("init_var = nan\n"), ConfigError);
  EXPECT_THROW(parse("estimator = trpo\n"), ConfigError);
  EXPECT_THROW(parse("experiment = mujoco\n"), ConfigError);
  EXPECT_THROW(parse("penalty = huge\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/capg.cfg"), ConfigError);
}

TEST(Config, Validation) {
  const auto invalid = [](auto mutate) {
    ExperimentConfig cfg;
    mutate(cfg);
    return cfg;
  };
  EXPECT_THROW(invalid([](auto& c) { c.batch_size = 0; }).validate(), ConfigError);
  EXPECT_THROW(invalid([](auto& c) { c.updates = 0; }).validate(), ConfigError);
  EXPECT_THROW(invalid([](auto& c) { c.seeds.clear(); }).validate(), ConfigError);
  EXPECT_THROW(invalid([](auto& c) { c.init_var = 0.0; }).validate(), ConfigError);
  EXPECT_THROW(invalid([](auto& c) { c.bound_low = 1.0; }).validate(), ConfigError);
  EXPECT_NO_THROW(invalid([](auto& c) {
                    c.experiment = Experiment::Mdp;
                    c.updates = 0;
                  }).validate());
  EXPECT_THROW(invalid([](auto& c) {
                 c.experiment = Experiment::Mdp;
                 c.horizon = 0;
               }).validate(),
               ConfigError);
}

TEST(Format, ShortestRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(rng.normal(), static_cast<int>(rng.uniform() * 200) - 100);
    const std::string s = format_real(x);
    ASSERT_EQ(parse_real(s), x) << s;
  }
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(-1.0), "-1");
  EXPECT_EQ(format_real(1e-300), "1e-300");
  EXPECT_EQ(parse_real("+2.5"), 2.5);
  EXPECT_THROW(parse_real("1.0x"), std::invalid_argument);
  EXPECT_THROW(parse_real(""), std::invalid_argument);
}

TEST(ParameterNames, Layouts) {
  EXPECT_EQ(parameter_names(ParamLayout{2, 0}),
            (std::vector<std::string>{"mu_0", "mu_1", "logsigma_0", "logsigma_1"}));
  EXPECT_EQ(parameter_names(ParamLayout{1, 1}), (std::vector<std::string>{"w_0_0", "b_0", "logsigma_0"}));
}

TEST(TrailingMean, PartialWindows) {
  EXPECT_EQ(trailing_mean({1, 2, 3, 4}, 2), (std::vector<double>{1, 1.5, 2.5, 3.5}));
  EXPECT_EQ(trailing_mean({4, 2}, 100), (std::vector<double>{4, 3}));
  EXPECT_TRUE(trailing_mean({}, 3).empty());
}

TEST(VarianceGrid, ShapeAndPairedComparison) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::Variance;
  cfg.grid_means = {0.0};
  cfg.grid_vars = {1.0, 0.1};
  const auto rows = run_variance_grid(cfg);
  ASSERT_EQ(rows.size(), 2u * 2u * 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.n_batches, 10000u);
    EXPECT_EQ(r.batch_size, 5u);
    EXPECT_GE(r.grad_std, 0.0);
  }
  const auto unit = by_param(rows, 0.0, 1.0);
  for (const std::string p : {"mu_0", "logsigma_0"}) {
    const auto& pg = unit.at({p, EstimatorKind::PG});
    const auto& capg = unit.at({p, EstimatorKind::CAPG});
    EXPECT_LT(capg.grad_std, pg.grad_std) << p;
    const double se = std::hypot(pg.grad_std, capg.grad_std) / std::sqrt(10000.0);
    EXPECT_LE(std::abs(pg.grad_mean - capg.grad_mean), 4 * se) << p;
  }
  const auto narrow = by_param(rows, 0.0, 0.1);
  for (const std::string p : {"mu_0", "logsigma_0"}) {
    const double pg = narrow.at({p, EstimatorKind::PG}).grad_std;
    const double capg = narrow.at({p, EstimatorKind::CAPG}).grad_std;
    EXPECT_LT(std::abs(capg - pg) / pg, 0.05) << p;
  }
}

TEST(VarianceGrid, SingleEstimatorMatchesPairedRun) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::Variance;
  cfg.grid_means = {0.5};
  cfg.grid_vars = {1.0};
  cfg.mc_batches = 500;
  const auto both = run_variance_grid(cfg);
  cfg.estimator = EstimatorSelection::CAPG;
  const auto only = run_variance_grid(cfg);
  ASSERT_EQ(only.size(), 2u);
  EXPECT_EQ(only[0].grad_std, both[2].grad_std);
  EXPECT_EQ(only[1].grad_mean, both[3].grad_mean);
}

TEST(VarianceGrid, CsvFormat) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::Variance;
  cfg.grid_means = {1.5};
  cfg.grid_vars = {10.0};
  cfg.mc_batches = 20;
  const std::string text = csv(run_variance_grid(cfg), write_gradient_stats_csv);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "mean,var,d,parameter,estimator,grad_mean,grad_std,n_batches,batch_size");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("1.5,10,1,mu_0,pg,", 0), 0u) << line;
  EXPECT_EQ(line.substr(line.size() - 5), ",20,5");
}

TEST(BanditTraining, DeterministicPolicyStaysOptimal) {
  ExperimentConfig cfg;
  cfg.init_var = std::exp(-40.0);
  cfg.updates = 500;
  cfg.seeds = {0, 1};
  const auto runs = train_bandit(cfg);
  for (const auto& run : runs) {
    EXPECT_LT(std::abs(run.curve.front().smoothed_reward), 1e-6);
    // Adam rescales the O(1) score noise into steps of size lr, so the mean
    // jitters around zero at that scale from the second update on.
    for (const auto& p : run.curve) ASSERT_LE(std::abs(p.smoothed_reward), 2 * cfg.adam_lr);
  }
}

TEST(BanditTraining, CurveShape) {
  ExperimentConfig cfg;
  cfg.updates = 50;
  cfg.seeds = {3, 1};
  const auto curve = run_bandit_training(cfg);
  ASSERT_EQ(curve.size(), 2u * 2u * 50u);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& p = curve[i];
    EXPECT_EQ(p.seed, i < 100 ? 3 : 1);
    EXPECT_EQ(p.estimator, (i / 50) % 2 == 0 ? EstimatorKind::PG : EstimatorKind::CAPG);
    EXPECT_EQ(p.update_index, i % 50 + 1);
    EXPECT_LE(p.smoothed_reward, 0.0);
  }
}

TEST(BanditTraining, ByteIdenticalReruns) {
  ExperimentConfig cfg;
  cfg.updates = 300;
  cfg.d = 3;
  cfg.seeds = {0, 5};
  EXPECT_EQ(csv(run_bandit_training(cfg), write_curve_csv), csv(run_bandit_training(cfg), write_curve_csv));
}

TEST(BanditTraining, SeedOrderDoesNotChangeRuns) {
  ExperimentConfig a;
  a.updates = 200;
  a.seeds = {1, 2, 3};
  ExperimentConfig b = a;
  b.seeds = {3, 1};
  const auto ra = train_bandit(a);
  const auto rb = train_bandit(b);
  const auto find = [](const std::vector<TrainingRun>& runs, std::int64_t seed, EstimatorKind k) {
    for (const auto& r : runs) {
      if (r.seed == seed && r.estimator == k) return r;
    }
    throw std::logic_error("missing run");
  };
  for (const std::int64_t seed : {1, 3}) {
    for (const auto k : {EstimatorKind::PG, EstimatorKind::CAPG}) {
      EXPECT_EQ(csv(find(ra, seed, k).curve, write_curve_csv), csv(find(rb, seed, k).curve, write_curve_csv));
    }
  }
  // Different seeds and estimators draw from different streams.
  EXPECT_NE(csv(find(ra, 1, EstimatorKind::PG).curve, write_curve_csv).substr(40),
            csv(find(ra, 2, EstimatorKind::PG).curve, write_curve_csv).substr(40));
  ExperimentConfig c = a;
  c.master_seed = 1;
  EXPECT_NE(csv(run_bandit_training(a), write_curve_csv), csv(run_bandit_training(c), write_curve_csv));
}

TEST(Checkpoint, RoundTrip) {
  ExperimentConfig cfg;
  cfg.updates = 100;
  cfg.d = 2;
  cfg.seeds = {7, 8};
  const auto runs = train_bandit(cfg);
  std::stringstream ss;
  write_checkpoint(ss, runs);
  const auto back = read_checkpoint(ss);
  ASSERT_EQ(back.size(), runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    EXPECT_EQ(back[i].seed, runs[i].seed);
    EXPECT_EQ(back[i].estimator, runs[i].estimator);
    EXPECT_EQ(back[i].final_params, runs[i].final_params);
    EXPECT_EQ(back[i].adam, runs[i].adam);
  }
  std::stringstream bad("capg-checkpoint 2 0\n");
  EXPECT_THROW(read_checkpoint(bad), std::runtime_error);
}

TEST(MdpTraining, ZeroUpdatesGiveHeaderOnly) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::Mdp;
  cfg.updates = 0;
  EXPECT_EQ(csv(run_mdp_training(cfg), write_curve_csv), "seed,update_index,smoothed_reward,estimator\n");
}

TEST(MdpTraining, DeterministicAndPreclipRoutes) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::Mdp;
  cfg.updates = 30;
  cfg.seeds = {0};
  cfg.penalty = PenaltyMode::Preclip;
  const auto a = csv(run_mdp_training(cfg), write_curve_csv);
  EXPECT_EQ(a, csv(run_mdp_training(cfg), write_curve_csv));
  cfg.penalty = PenaltyMode::Clipped;
  EXPECT_NE(a, csv(run_mdp_training(cfg), write_curve_csv));
}

TEST(MdpTraining, BothEstimatorsImproveReturnByHalf) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::Mdp;
  cfg.updates = 2000;
  const auto runs = train_mdp(cfg);
  for (const auto kind : {EstimatorKind::PG, EstimatorKind::CAPG}) {
    double first = 0.0, last = 0.0;
    for (const auto& run : runs) {
      if (run.estimator != kind) continue;
      first += run.curve.front().smoothed_reward;
      last += run.curve.back().smoothed_reward;
    }
    const double improvement = (last - first) / std::abs(first);
    EXPECT_GE(improvement, 0.5) << to_string(kind) << " first " << first << " last " << last;
  }
}

// Horizon 1 with no penalty is a state-conditioned bandit whose reward depends
// on the action only through the clip: PG and CAPG must agree in mean.
TEST(MdpTraining, HorizonOneUnbiasedCrossCheck) {
  IntegratorMdp env;
  env.horizon = 1;
  const GaussianPolicyParams p(ParamLayout{1, 1}, {-0.6, 0.4, 0.0});
  Rng rng(17);
  VectorMoments pg_m(3), capg_m(3);
  const std::size_t n = 400'000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ep = rollout(env, p, rng);
    // The immediate -s^2 reward does not depend on u; use the next-state cost.
    const double s1 = ep.steps[0].state[0] + ep.steps[0].clipped_action[0];
    const Batch batch({{ep.steps[0].state, ep.steps[0].pre_clip_action, -s1 * s1}});
    pg_m.add(estimate(batch, p, env.bounds, EstimatorKind::PG).flat());
    capg_m.add(estimate(batch, p, env.bounds, EstimatorKind::CAPG).flat());
  }
  for (std::size_t j = 0; j < 3; ++j) {
    const double se = std::hypot(pg_m[j].std_error(), capg_m[j].std_error());
    EXPECT_LE(std::abs(pg_m[j].mean() - capg_m[j].mean()), 4 * se) << j;
    EXPECT_LE(capg_m[j].variance(), pg_m[j].variance()) << j;
  }
}

ExperimentConfig small_verify() {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::Verify;
  cfg.verify_samples = 2'000'000;
  return cfg;
}

TEST(Verification, WideBoundsAgreeExactly) {
  const auto r = check_interior_agreement(0.5, 1.0, -50.0, 50.0, 100'000, 1, ScoreSet::standard());
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.statistic, 0.0);
}

TEST(Verification, NormalizationAgainstOracle) {
  const auto r = check_clipped_normalization(0.5, 1.0, -1.0, 1.0);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.statistic, 1e-9);
  EXPECT_NEAR(oracle::cdf(-1.5) + (oracle::cdf(0.5) - oracle::cdf(-1.5)) + oracle::cdf(-0.5), 1.0, 1e-15);
}

TEST(Verification, VectorConfigRowsPass) {
  const auto rows = check_unbiased_lower_variance({0.0, 0.5, 1.0}, 1.0, 200'000, 5, ScoreSet::standard(),
                                                  "d3");
  EXPECT_GE(rows.size(), 9u);
  for (const auto& r : rows) EXPECT_TRUE(r.passed) << r.name << ' ' << r.statistic;
}

TEST(Verification, SmallSuitePassesAndWritesCsv) {
  const auto report = run_verification(small_verify());
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << ' ' << c.statistic;
  std::ostringstream os;
  write_verification_csv(os, report);
  EXPECT_EQ(os.str().rfind("name,statistic,threshold,pass\n", 0), 0u);
  EXPECT_EQ(os.str().find(",fail\n"), std::string::npos);
}

ScoreSet upper_sign_flipped() {
  ScoreSet s = ScoreSet::standard();
  s.capg = [](const GaussianPolicyParams& p, std::span<const double> state, std::span<const double> u,
              const ActionBounds& b, std::span<double> out) {
    score_capg_into(p, state, u, b, out);
    const auto& layout = p.layout();
    for (std::size_t i = 0; i < layout.action_dim; ++i) {
      if (u[i] >= b.upper(i)) {
        for (std::size_t j = 0; j <= layout.state_dim; ++j) out[i * (layout.state_dim + 1) + j] *= -1.0;
        out[layout.log_std_index(i)] *= -1.0;
      }
    }
  };
  return s;
}

TEST(Verification, CorruptedUpperBranchIsCaught) {
  const auto report = run_verification(small_verify(), upper_sign_flipped());
  EXPECT_FALSE(report.all_passed());
  EXPECT_GE(report.failures(), 3u);
}

}  // namespace
}  // namespace capg::harness
