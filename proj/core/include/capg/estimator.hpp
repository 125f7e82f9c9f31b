#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "capg/bounds.hpp"
#include "capg/policy.hpp"

namespace capg {

enum class EstimatorKind { PG, CAPG };

std::string_view to_string(EstimatorKind kind) noexcept;
std::optional<EstimatorKind> parse_estimator_kind(std::string_view text) noexcept;

enum class BaselineMode { None, BatchMean };

/// One (state, pre-clip action, weight) sample. weight is the caller's
/// Q / return / advantage estimate for that pair.
struct BatchEntry {
  std::vector<double> state;
  std::vector<double> action;
  double weight = 0.0;
};

/// Nonempty set of entries with a common state and action dimension and
/// finite weights.
class Batch {
 public:
  explicit Batch(std::vector<BatchEntry> entries);

  std::span<const BatchEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t action_dim() const noexcept { return entries_.front().action.size(); }
  std::size_t state_dim() const noexcept { return entries_.front().state.size(); }

 private:
  std::vector<BatchEntry> entries_;
};

using GradientEstimate = Gradient;

/// Writes one per-sample score into out; the signature of score_capg_into.
using ScoreFn = std::function<void(const GaussianPolicyParams&, std::span<const double> state,
                                   std::span<const double> action, const ActionBounds&,
                                   std::span<double> out)>;

ScoreFn score_fn(EstimatorKind kind);

Batch apply_baseline(const Batch& batch, BaselineMode mode);

/// (1/N) sum_i weight_i * score(state_i, action_i), accumulated in batch
/// order with compensated summation.
GradientEstimate estimate(const Batch& batch, const GaussianPolicyParams& params,
                          const ActionBounds& bounds, EstimatorKind kind);
GradientEstimate estimate_with(const Batch& batch, const GaussianPolicyParams& params,
                               const ActionBounds& bounds, const ScoreFn& score);

/// Sample whose return splits as r(s, u) + gamma * G', where r may depend on
/// the pre-clip action and G' depends on u only through clip(u).
struct DecomposedEntry {
  std::vector<double> state;
  std::vector<double> action;
  double immediate_reward = 0.0;
  double continuation_weight = 0.0;
};

/// (1/N) sum_i [ r_i * psi(s_i, u_i) + (gamma G')_i * psi-bar(s_i, u_i) ].
GradientEstimate estimate_decomposed(std::span<const DecomposedEntry> entries,
                                     const GaussianPolicyParams& params,
                                     const ActionBounds& bounds);
GradientEstimate estimate_decomposed_with(std::span<const DecomposedEntry> entries,
                                          const GaussianPolicyParams& params,
                                          const ActionBounds& bounds, const ScoreFn& pg,
                                          const ScoreFn& capg);

}  // namespace capg
