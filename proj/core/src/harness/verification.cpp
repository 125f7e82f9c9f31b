#include "capg/harness/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "capg/envs.hpp"
#include "capg/format.hpp"
#include "capg/harness/experiments.hpp"
#include "capg/gauss.hpp"
#include "capg/policy.hpp"
#include "capg/rng.hpp"
#include "capg/stats.hpp"

namespace capg::harness {
namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdTolerance = 1e-6;
constexpr double kMeanSe = 4.0;
constexpr double kStrictVarianceSe = 5.0;
constexpr double kTailVarianceSe = 4.0;
constexpr double kEndpointSe = 3.0;
constexpr double kNormalizationTol = 1e-9;
constexpr double kDecompositionRelTol = 0.01;
constexpr double kStrictClipProbability = 0.05;

const std::array<const char*, 2> kScalarParams = {"mu", "logsigma"};

CheckResult at_most(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, statistic <= threshold};
}

CheckResult at_least(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, statistic >= threshold};
}

double clip_probability(double mean, double sigma, double lower, double upper) {
  return std::exp(gauss::std_normal_log_cdf((lower - mean) / sigma)) +
         std::exp(gauss::std_normal_log_sf((upper - mean) / sigma));
}

// --- finite differences ---------------------------------------------------

enum class Stratum { Interior, Lower, Upper, Mixed };
const std::array<const char*, 4> kStratumNames = {"interior", "lower", "upper", "mixed"};

struct FdCase {
  GaussianPolicyParams params;
  std::vector<double> state;
  std::vector<double> action;
  ActionBounds bounds;
};

FdCase random_case(Stratum stratum, Rng& rng) {
  const std::size_t d = stratum == Stratum::Mixed ? 3 : 1 + rng.engine()() % 3;
  const std::size_t k = rng.engine()() % 3;
  const ParamLayout layout{d, k};
  std::vector<double> flat(layout.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < k; ++j) flat[i * (k + 1) + j] = 0.5 * rng.normal();
    flat[layout.bias_index(i)] = rng.normal();
    // sigma log-uniform on [0.1, 10]
    flat[layout.log_std_index(i)] = std::log(0.1) + rng.uniform() * (std::log(10.0) - std::log(0.1));
  }
  GaussianPolicyParams params(layout, std::move(flat));
  std::vector<double> state(k);
  for (auto& s : state) s = rng.normal();
  std::vector<double> lo(d), hi(d), u(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double mu = params.mean(i, state);
    const double sigma = params.sigma(i);
    lo[i] = mu - sigma * (0.5 + 2.0 * rng.uniform());
    hi[i] = mu + sigma * (0.5 + 2.0 * rng.uniform());
    Stratum s = stratum;
    if (stratum == Stratum::Mixed) s = static_cast<Stratum>(i % 3);
    switch (s) {
      case Stratum::Interior:
        u[i] = lo[i] + (hi[i] - lo[i]) * (0.05 + 0.9 * rng.uniform());
        break;
      case Stratum::Lower:
        u[i] = lo[i] - 2.0 * sigma * rng.uniform();
        break;
      case Stratum::Upper:
        u[i] = hi[i] + 2.0 * sigma * rng.uniform();
        break;
      case Stratum::Mixed:
        break;
    }
  }
  return {std::move(params), std::move(state), std::move(u), ActionBounds(lo, hi)};
}

template <typename LogDensity>
double max_fd_error(const GaussianPolicyParams& params, std::span<const double> analytic,
                    LogDensity&& log_density) {
  double worst = 0.0;
  const auto base = params.flat();
  for (std::size_t p = 0; p < base.size(); ++p) {
    std::vector<double> plus(base.begin(), base.end());
    std::vector<double> minus(base.begin(), base.end());
    plus[p] += kFdStep;
    minus[p] -= kFdStep;
    const double fd = (log_density(params.with_flat(std::move(plus))) -
                       log_density(params.with_flat(std::move(minus)))) /
                      (2.0 * kFdStep);
    worst = std::max(worst, std::abs(analytic[p] - fd) / std::max(std::abs(fd), 1.0));
  }
  return worst;
}

// --- Monte-Carlo helpers ----------------------------------------------------

// Streams scalar bandit draws u ~ N(mean, sigma^2) with their PG and CAPG
// scores for the bandit policy (flat layout [mu, log_std]).
class ScalarSampler {
 public:
  ScalarSampler(double mean, double sigma, double lower, double upper, const ScoreSet& scores)
      : params_(GaussianPolicyParams::state_independent({mean}, {std::log(sigma)})),
        bounds_({lower}, {upper}),
        scores_(scores) {}

  void score(double u) {
    action_[0] = u;
    scores_.pg(params_, {}, action_, bounds_, pg_);
    scores_.capg(params_, {}, action_, bounds_, capg_);
  }

  const GaussianPolicyParams& params() const { return params_; }
  const ActionBounds& bounds() const { return bounds_; }
  std::span<const double> pg() const { return pg_; }
  std::span<const double> capg() const { return capg_; }

 private:
  GaussianPolicyParams params_;
  ActionBounds bounds_;
  const ScoreSet& scores_;
  std::array<double, 1> action_{};
  std::array<double, 2> pg_{};
  std::array<double, 2> capg_{};
};

double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

bool VerificationReport::all_passed() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(),
                                                [](const CheckResult& c) { return !c.passed; }));
}

ScoreSet ScoreSet::standard() {
  return {score_fn(EstimatorKind::PG), score_fn(EstimatorKind::CAPG)};
}

std::vector<CheckResult> check_finite_differences(std::size_t configs, std::uint64_t seed,
                                                  const ScoreSet& scores) {
  Rng rng(seed);
  std::array<double, 4> pg_err{}, capg_err{};
  for (std::size_t c = 0; c < configs; ++c) {
    const auto stratum = static_cast<Stratum>(c % 4);
    const FdCase fc = random_case(stratum, rng);
    std::vector<double> analytic(fc.params.layout().size());

    scores.pg(fc.params, fc.state, fc.action, fc.bounds, analytic);
    const double e_pg = max_fd_error(fc.params, analytic, [&](const GaussianPolicyParams& p) {
      return log_prob(p, fc.state, fc.action);
    });
    pg_err[c % 4] = std::max(pg_err[c % 4], e_pg);

    const std::vector<double> clipped = clip_action(fc.action, fc.bounds);
    scores.capg(fc.params, fc.state, fc.action, fc.bounds, analytic);
    const double e_capg = max_fd_error(fc.params, analytic, [&](const GaussianPolicyParams& p) {
      return log_prob_clipped(p, fc.state, clipped, fc.bounds);
    });
    capg_err[c % 4] = std::max(capg_err[c % 4], e_capg);
  }
  std::vector<CheckResult> out;
  for (std::size_t s = 0; s < 4; ++s) {
    out.push_back(at_most(std::string("fd_score_pg_") + kStratumNames[s], pg_err[s], kFdTolerance));
  }
  for (std::size_t s = 0; s < 4; ++s) {
    out.push_back(
        at_most(std::string("fd_score_capg_") + kStratumNames[s], capg_err[s], kFdTolerance));
  }
  return out;
}

std::vector<CheckResult> check_tail_identities(double mean, double sigma, double lower, double upper,
                                           std::size_t samples, std::uint64_t seed,
                                           const ScoreSet& scores) {
  ScalarSampler sampler(mean, sigma, lower, upper, scores);

  // Closed-form right-hand sides: P(tail) * psi-bar evaluated at the bound.
  const double p_lower = std::exp(gauss::std_normal_log_cdf((lower - mean) / sigma));
  const double p_upper = std::exp(gauss::std_normal_log_sf((upper - mean) / sigma));
  std::array<double, 2> target_lower{}, target_upper{};
  sampler.score(lower);
  for (std::size_t j = 0; j < 2; ++j) target_lower[j] = p_lower * sampler.capg()[j];
  sampler.score(upper);
  for (std::size_t j = 0; j < 2; ++j) target_upper[j] = p_upper * sampler.capg()[j];

  std::array<RunningMoments, 2> lo_psi, hi_psi, lo_diff, hi_diff;
  Rng rng(seed);
  for (std::size_t n = 0; n < samples; ++n) {
    const double u = mean + sigma * rng.normal();
    const bool in_lower = u <= lower;
    const bool in_upper = u >= upper;
    if (in_lower || in_upper) sampler.score(u);
    for (std::size_t j = 0; j < 2; ++j) {
      const double x_lo = in_lower ? sampler.pg()[j] : 0.0;
      const double y_lo = in_lower ? sampler.capg()[j] : 0.0;
      const double x_hi = in_upper ? sampler.pg()[j] : 0.0;
      const double y_hi = in_upper ? sampler.capg()[j] : 0.0;
      lo_psi[j].add(x_lo);
      hi_psi[j].add(x_hi);
      const double cl = target_lower[j];
      const double ch = target_upper[j];
      lo_diff[j].add((x_lo - cl) * (x_lo - cl) - (y_lo - cl) * (y_lo - cl));
      hi_diff[j].add((x_hi - ch) * (x_hi - ch) - (y_hi - ch) * (y_hi - ch));
    }
  }

  std::vector<CheckResult> out;
  for (std::size_t j = 0; j < 2; ++j) {
    const std::string p = kScalarParams[j];
    out.push_back(at_most("tail_mean_lower_" + p,
                          std::abs(lo_psi[j].mean() - target_lower[j]) / lo_psi[j].std_error(),
                          kMeanSe));
    out.push_back(at_most("tail_mean_upper_" + p,
                          std::abs(hi_psi[j].mean() - target_upper[j]) / hi_psi[j].std_error(),
                          kMeanSe));
  }
  for (std::size_t j = 0; j < 2; ++j) {
    const std::string p = kScalarParams[j];
    out.push_back(at_least("tail_variance_strict_lower_" + p, lo_diff[j].mean() / lo_diff[j].std_error(),
                           kTailVarianceSe));
    out.push_back(at_least("tail_variance_strict_upper_" + p, hi_diff[j].mean() / hi_diff[j].std_error(),
                           kTailVarianceSe));
  }
  return out;
}

std::vector<CheckResult> check_unbiased_lower_variance(const std::vector<double>& mean,
                                                       double sigma, std::size_t samples,
                                                       std::uint64_t seed,
                                                       const ScoreSet& scores,
                                                       const std::string& label) {
  const std::size_t d = mean.size();
  const GaussianPolicyParams params =
      GaussianPolicyParams::state_independent(mean, std::vector<double>(d, std::log(sigma)));
  const BanditEnv env(d);
  const std::size_t n_params = params.layout().size();
  std::vector<double> u(d), pg(n_params), capg(n_params);
  std::vector<FourthMoments> m_pg(n_params), m_capg(n_params);
  Rng rng(seed);
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t i = 0; i < d; ++i) u[i] = mean[i] + sigma * rng.normal();
    const double f = bandit_reward(env, u);
    scores.pg(params, {}, u, env.bounds, pg);
    scores.capg(params, {}, u, env.bounds, capg);
    for (std::size_t p = 0; p < n_params; ++p) {
      m_pg[p].add(f * pg[p]);
      m_capg[p].add(f * capg[p]);
    }
  }
  const auto names = parameter_names(params.layout());
  std::vector<CheckResult> out;
  for (std::size_t p = 0; p < n_params; ++p) {
    const double n = static_cast<double>(samples);
    const VarianceEstimate v_pg = m_pg[p].variance();
    const VarianceEstimate v_capg = m_capg[p].variance();
    const double se = combined_se(std::sqrt(v_pg.variance / n), std::sqrt(v_capg.variance / n));
    const std::string base = label + "_" + names[p];
    out.push_back(at_most("unbiased_" + base, std::abs(m_pg[p].mean() - m_capg[p].mean()) / se,
                          kMeanSe));
    out.push_back(at_most("variance_ratio_" + base, v_capg.variance / v_pg.variance, 1.0));
    const std::size_t dim = p < d ? p : p - d;
    if (clip_probability(mean[dim], sigma, env.bounds.lower(dim), env.bounds.upper(dim)) >=
        kStrictClipProbability) {
      out.push_back(at_least("variance_strict_" + base,
                             (v_pg.variance - v_capg.variance) /
                                 combined_se(v_pg.std_error, v_capg.std_error),
                             kStrictVarianceSe));
    }
  }
  return out;
}

std::vector<CheckResult> check_variance_decomposition(double mean, double sigma, double lower,
                                                      double upper, std::size_t samples,
                                                      std::uint64_t seed,
                                                      const ScoreSet& scores) {
  ScalarSampler sampler(mean, sigma, lower, upper, scores);
  const BanditEnv env(sampler.bounds());
  // Raw sums of X and 1_r X, 1_r X^2 per region r in {lower, interior, upper}.
  std::array<CompensatedSum, 2> sx, sxx;
  std::array<std::array<CompensatedSum, 3>, 2> rx, rxx;
  Rng rng(seed);
  for (std::size_t n = 0; n < samples; ++n) {
    const double u = mean + sigma * rng.normal();
    const std::array<double, 1> a{u};
    const double f = bandit_reward(env, a);
    sampler.score(u);
    const int region = u <= lower ? 0 : (u >= upper ? 2 : 1);
    for (std::size_t j = 0; j < 2; ++j) {
      const double x = f * sampler.pg()[j];
      sx[j].add(x);
      sxx[j].add(x * x);
      rx[j][region].add(x);
      rxx[j][region].add(x * x);
    }
  }
  const double n = static_cast<double>(samples);
  std::vector<CheckResult> out;
  for (std::size_t j = 0; j < 2; ++j) {
    const double m = sx[j].value() / n;
    const double total = sxx[j].value() / n - m * m;
    std::array<double, 3> e{};
    double recon = 0.0;
    for (std::size_t r = 0; r < 3; ++r) {
      e[r] = rx[j][r].value() / n;
      recon += rxx[j][r].value() / n - e[r] * e[r];
    }
    recon -= 2.0 * (e[0] * e[1] + e[1] * e[2] + e[2] * e[0]);
    out.push_back(at_most(std::string("variance_decomposition_") + kScalarParams[j],
                          std::abs(recon - total) / total, kDecompositionRelTol));
  }
  return out;
}

CheckResult check_clipped_normalization(double mean, double sigma, double lower, double upper) {
  const double p_lower = std::exp(gauss::std_normal_log_cdf((lower - mean) / sigma));
  const double p_upper = std::exp(gauss::std_normal_log_sf((upper - mean) / sigma));
  const auto density = [&](double x) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  const double interior =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, lower, upper, 15,
                                                                    1e-14);
  return at_most("clipped_normalization_mu" + format_real(mean) + "_sigma" + format_real(sigma),
                 std::abs(p_lower + interior + p_upper - 1.0), kNormalizationTol);
}

std::vector<CheckResult> check_endpoint_frequencies(double mean, double sigma, double lower,
                                                    double upper, std::size_t draws,
                                                    std::uint64_t seed) {
  const GaussianPolicyParams params = GaussianPolicyParams::state_independent({mean}, {std::log(sigma)});
  const ActionBounds bounds({lower}, {upper});
  Rng rng(seed);
  std::size_t at_lower = 0, at_upper = 0;
  for (std::size_t n = 0; n < draws; ++n) {
    const double u = sample_clipped(params, {}, bounds, rng)[0];
    at_lower += u == lower;
    at_upper += u == upper;
  }
  const double n = static_cast<double>(draws);
  const auto binomial_z = [n](std::size_t hits, double p) {
    return std::abs(static_cast<double>(hits) / n - p) / std::sqrt(p * (1.0 - p) / n);
  };
  const double p_lower = std::exp(gauss::std_normal_log_cdf((lower - mean) / sigma));
  const double p_upper = std::exp(gauss::std_normal_log_sf((upper - mean) / sigma));
  return {at_most("endpoint_frequency_lower", binomial_z(at_lower, p_lower), kEndpointSe),
          at_most("endpoint_frequency_upper", binomial_z(at_upper, p_upper), kEndpointSe)};
}

std::vector<CheckResult> check_decomposed(double mean, double sigma, double coef,
                                          std::size_t samples, std::uint64_t seed,
                                          const ScoreSet& scores) {
  ScalarSampler sampler(mean, sigma, -1.0, 1.0, scores);
  const BanditEnv env(sampler.bounds());
  std::array<FourthMoments, 2> m_pg, m_dec;
  Rng rng(seed);
  for (std::size_t n = 0; n < samples; ++n) {
    const double u = mean + sigma * rng.normal();
    const std::array<double, 1> a{u};
    const double clipped_part = bandit_reward(env, a);
    const double penalty = preclip_penalty(a, coef);
    sampler.score(u);
    for (std::size_t j = 0; j < 2; ++j) {
      m_pg[j].add((clipped_part + penalty) * sampler.pg()[j]);
      m_dec[j].add(penalty * sampler.pg()[j] + clipped_part * sampler.capg()[j]);
    }
  }
  const double n = static_cast<double>(samples);
  std::vector<CheckResult> out;
  for (std::size_t j = 0; j < 2; ++j) {
    const VarianceEstimate v_pg = m_pg[j].variance();
    const VarianceEstimate v_dec = m_dec[j].variance();
    const double se = combined_se(std::sqrt(v_pg.variance / n), std::sqrt(v_dec.variance / n));
    out.push_back(at_most(std::string("decomposed_unbiased_") + kScalarParams[j],
                          std::abs(m_pg[j].mean() - m_dec[j].mean()) / se, kMeanSe));
    out.push_back(at_most(std::string("decomposed_variance_ratio_") + kScalarParams[j],
                          v_dec.variance / v_pg.variance, 1.0));
  }
  return out;
}

CheckResult check_interior_agreement(double mean, double sigma, double lower, double upper,
                                     std::size_t samples, std::uint64_t seed,
                                     const ScoreSet& scores) {
  ScalarSampler sampler(mean, sigma, lower, upper, scores);
  Rng rng(seed);
  std::size_t mismatches = 0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double u = mean + sigma * rng.normal();
    if (!(u > lower && u < upper)) continue;
    sampler.score(u);
    mismatches += !std::equal(sampler.pg().begin(), sampler.pg().end(), sampler.capg().begin());
  }
  return at_most("capg_equals_pg_interior_bounds" + format_real(upper),
                 static_cast<double>(mismatches), 0.0);
}

VerificationReport run_verification(const ExperimentConfig& cfg, const ScoreSet& scores) {
  cfg.validate();
  const std::size_t n_tail = cfg.verify_samples;
  const std::size_t n_mc = std::max<std::size_t>(cfg.verify_samples / 10, 1000);
  const auto stream = [&](std::uint64_t cell) {
    return cell_stream(cfg, Experiment::Verify, cfg.seeds.front(), cell);
  };
  const double lo = cfg.bound_low;
  const double hi = cfg.bound_high;

  VerificationReport report;
  const auto append = [&](std::vector<CheckResult> rows) {
    report.checks.insert(report.checks.end(), rows.begin(), rows.end());
  };

  append(check_finite_differences(cfg.verify_fd_configs, stream(1), scores));
  report.checks.push_back(check_interior_agreement(0.5, 1.0, lo, hi, n_mc, stream(2), scores));
  report.checks.push_back(check_interior_agreement(0.5, 1.0, -50.0, 50.0, n_mc, stream(3), scores));
  append(check_tail_identities(0.5, 1.0, lo, hi, n_tail, stream(4), scores));

  std::uint64_t cell = 10;
  for (const double mu : {0.0, 1.0}) {
    for (const double sigma : {0.5, 1.0, 2.0}) {
      append(check_unbiased_lower_variance({mu}, sigma, n_mc, stream(cell++), scores,
                                           "d1_mu" + format_real(mu) + "_sigma" + format_real(sigma)));
    }
  }
  append(check_unbiased_lower_variance({0.0, 0.5, 1.0}, 1.0, n_mc, stream(cell++), scores,
                                       "d3_sigma1"));

  append(check_variance_decomposition(0.5, 1.0, lo, hi, n_mc, stream(20), scores));
  for (const auto& [mu, sigma] : std::array<std::pair<double, double>, 5>{
           {{0.0, 1.0}, {0.5, 1.0}, {0.0, 2.0}, {1.5, 0.3}, {-2.0, 5.0}}}) {
    report.checks.push_back(check_clipped_normalization(mu, sigma, lo, hi));
  }
  append(check_endpoint_frequencies(0.5, 1.0, lo, hi, n_mc, stream(21)));
  append(check_decomposed(0.0, 1.0, cfg.penalty_coef, n_tail, stream(22), scores));
  return report;
}

void write_verification_csv(std::ostream& os, const VerificationReport& report) {
  os << "name,statistic,threshold,pass\n";
  for (const auto& c : report.checks) {
    os << c.name << ',' << format_real(c.statistic) << ',' << format_real(c.threshold) << ','
       << (c.passed ? "pass" : "fail") << '\n';
  }
}

}  // namespace capg::harness
