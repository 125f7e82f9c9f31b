#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "capg/estimator.hpp"
#include "capg/harness/config.hpp"

namespace capg::harness {

/// One row of the verification report. `passed` already accounts for the
/// direction of the comparison: most checks need statistic <= threshold,
/// strict inequality checks (names containing "strict") need
/// statistic >= threshold.
struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  std::size_t failures() const;
};

/// Score functions under test. The finite-difference and closed-form oracles
/// never go through these, so a corrupted kernel shows up as failed rows.
struct ScoreSet {
  ScoreFn pg;
  ScoreFn capg;

  static ScoreSet standard();
};

/// Analytic scores against central differences of log_prob (PG) and
/// log_prob_clipped (CAPG) at `configs` random policies, stratified over
/// interior / lower / upper / mixed branch cases. One row per estimator and
/// stratum; statistic is the largest |a - f| / max(|f|, 1).
std::vector<CheckResult> check_finite_differences(std::size_t configs, std::uint64_t seed,
                                                  const ScoreSet& scores);

/// Tail identities at a scalar policy: E[1_tail psi] = P(tail) psi-bar(tail)
/// and Var[1_tail psi] > Var[1_tail psi-bar], for both tails.
std::vector<CheckResult> check_tail_identities(double mean, double sigma, double lower, double upper,
                                           std::size_t samples, std::uint64_t seed,
                                           const ScoreSet& scores);

/// Single-sample PG vs CAPG estimates on the bandit reward: equal means and no
/// larger CAPG variance per parameter; strictly smaller (5 SE) in dimensions
/// whose clip probability is at least 0.05.
std::vector<CheckResult> check_unbiased_lower_variance(const std::vector<double>& mean,
                                                       double sigma, std::size_t samples,
                                                       std::uint64_t seed,
                                                       const ScoreSet& scores,
                                                       const std::string& label);

/// Empirical three-region variance decomposition of f * psi for a scalar
/// policy; statistic is |reconstruction - total| / total.
std::vector<CheckResult> check_variance_decomposition(double mean, double sigma, double lower,
                                                      double upper, std::size_t samples,
                                                      std::uint64_t seed,
                                                      const ScoreSet& scores);

/// Clipped-distribution mass at both endpoints plus quadrature of the interior
/// density, against 1.
CheckResult check_clipped_normalization(double mean, double sigma, double lower, double upper);

/// Fraction of clipped draws landing exactly on each endpoint, against the
/// Gaussian tail probabilities; statistic is in binomial standard errors.
std::vector<CheckResult> check_endpoint_frequencies(double mean, double sigma, double lower,
                                                    double upper, std::size_t draws,
                                                    std::uint64_t seed);

/// Decomposed estimator on the pre-clip-penalty bandit against plain PG.
std::vector<CheckResult> check_decomposed(double mean, double sigma, double coef,
                                          std::size_t samples, std::uint64_t seed,
                                          const ScoreSet& scores);

/// psi-bar == psi bit-for-bit on every strictly interior sample.
CheckResult check_interior_agreement(double mean, double sigma, double lower, double upper,
                                     std::size_t samples, std::uint64_t seed,
                                     const ScoreSet& scores);

/// The full suite. Tail identities and the decomposed check use cfg.verify_samples draws; the
/// remaining Monte-Carlo checks use a tenth of that.
VerificationReport run_verification(const ExperimentConfig& cfg,
                                    const ScoreSet& scores = ScoreSet::standard());

void write_verification_csv(std::ostream& os, const VerificationReport& report);

}  // namespace capg::harness
