#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "capg/bounds.hpp"
#include "capg/rng.hpp"

namespace capg {

/// Flat parameter layout shared by policies, scores and gradient estimates:
///
///   [ w_00 .. w_0(k-1) b_0 | w_10 .. b_1 | ... | log_std_0 .. log_std_(d-1) ]
///
/// where d is the action dimension and k the number of state features. The
/// mean of action dimension i is mu_i(s) = sum_j w_ij s_j + b_i.
struct ParamLayout {
  std::size_t action_dim = 0;
  std::size_t state_dim = 0;

  std::size_t mean_params_per_dim() const noexcept { return state_dim + 1; }
  std::size_t num_mean_params() const noexcept { return action_dim * (state_dim + 1); }
  std::size_t size() const noexcept { return num_mean_params() + action_dim; }
  std::size_t bias_index(std::size_t i) const noexcept { return i * (state_dim + 1) + state_dim; }
  std::size_t log_std_index(std::size_t i) const noexcept { return num_mean_params() + i; }

  bool operator==(const ParamLayout&) const = default;
};

/// Per-parameter real vector in ParamLayout order. Used for scores (psi,
/// psi-bar) and for batch gradient estimates.
class Gradient {
 public:
  explicit Gradient(ParamLayout layout) : layout_(layout), values_(layout.size(), 0.0) {}
  Gradient(ParamLayout layout, std::vector<double> flat);

  const ParamLayout& layout() const noexcept { return layout_; }
  std::span<const double> flat() const noexcept { return values_; }
  std::span<double> flat() noexcept { return values_; }

  std::span<const double> d_mean_params() const noexcept {
    return std::span<const double>(values_).first(layout_.num_mean_params());
  }
  std::span<const double> d_log_std() const noexcept {
    return std::span<const double>(values_).subspan(layout_.num_mean_params());
  }
  double d_bias(std::size_t i) const { return values_[layout_.bias_index(i)]; }
  double d_log_std(std::size_t i) const { return values_[layout_.log_std_index(i)]; }

  bool operator==(const Gradient&) const = default;

 private:
  ParamLayout layout_;
  std::vector<double> values_;
};

using ScoreResult = Gradient;

/// Diagonal Gaussian policy with an affine-in-state mean head. Immutable once
/// built. log_std below kMinLogStd is rejected.
class GaussianPolicyParams {
 public:
  static constexpr double kMinLogStd = -20.0;

  GaussianPolicyParams(ParamLayout layout, std::vector<double> flat);

  /// Bandit policy: no state features, mu_i = mean[i].
  static GaussianPolicyParams state_independent(std::vector<double> mean,
                                                std::vector<double> log_std);

  /// Bandit policy with the same mean and variance in every dimension.
  static GaussianPolicyParams isotropic(std::size_t dim, double mean, double variance);

  const ParamLayout& layout() const noexcept { return layout_; }
  std::size_t action_dim() const noexcept { return layout_.action_dim; }
  std::size_t state_dim() const noexcept { return layout_.state_dim; }
  std::span<const double> flat() const noexcept { return values_; }

  double weight(std::size_t i, std::size_t j) const {
    return values_[i * layout_.mean_params_per_dim() + j];
  }
  double bias(std::size_t i) const { return values_[layout_.bias_index(i)]; }
  double log_std(std::size_t i) const { return values_[layout_.log_std_index(i)]; }
  double sigma(std::size_t i) const;

  /// mu_i(state). state.size() must equal state_dim().
  double mean(std::size_t i, std::span<const double> state) const;
  std::vector<double> mean(std::span<const double> state) const;

  /// Same layout, new values; validated like the constructor.
  GaussianPolicyParams with_flat(std::vector<double> flat) const;

  bool operator==(const GaussianPolicyParams&) const = default;

 private:
  ParamLayout layout_;
  std::vector<double> values_;
};

/// Score of one action dimension with respect to (mu_i, log_std_i).
struct DimScore {
  double d_mean;
  double d_log_std;
};

DimScore dim_score_pg(double action, double mean, double log_std);
DimScore dim_score_capg(double action, double mean, double log_std, double lower, double upper);

/// u = mu(state) + sigma * eps, eps ~ N(0, I). Not clipped.
std::vector<double> sample_action(const GaussianPolicyParams& params,
                                  std::span<const double> state, Rng& rng);

/// clip(sample_action(...)): a draw from the clipped distribution.
std::vector<double> sample_clipped(const GaussianPolicyParams& params,
                                   std::span<const double> state, const ActionBounds& bounds,
                                   Rng& rng);

double log_prob(const GaussianPolicyParams& params, std::span<const double> state,
                std::span<const double> action);

/// Log-density of the clipped distribution with respect to Lebesgue measure
/// plus point masses at the bounds. Endpoints are matched by exact equality.
/// Throws std::domain_error if the action leaves [lower, upper].
double log_prob_clipped(const GaussianPolicyParams& params, std::span<const double> state,
                        std::span<const double> clipped_action, const ActionBounds& bounds);

/// psi(s, u) = grad log pi(u | s), written into out (size layout().size()).
void score_pg_into(const GaussianPolicyParams& params, std::span<const double> state,
                   std::span<const double> action, std::span<double> out);

/// psi-bar(s, u): the log-CDF gradient for u_i <= lower_i, the log-survival
/// gradient for u_i >= upper_i, psi otherwise. Summed over dimensions.
void score_capg_into(const GaussianPolicyParams& params, std::span<const double> state,
                     std::span<const double> action, const ActionBounds& bounds,
                     std::span<double> out);

ScoreResult score_pg(const GaussianPolicyParams& params, std::span<const double> state,
                     std::span<const double> action);
ScoreResult score_capg(const GaussianPolicyParams& params, std::span<const double> state,
                       std::span<const double> action, const ActionBounds& bounds);

}  // namespace capg
