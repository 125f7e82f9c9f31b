#include "capg/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "capg/stats.hpp"

namespace capg {
namespace {

void check_entry_dims(std::size_t state_dim, std::size_t action_dim,
                      const GaussianPolicyParams& params) {
  if (action_dim != params.action_dim() || state_dim != params.state_dim()) {
    throw std::invalid_argument("estimate: batch dimensions do not match the policy");
  }
}

class GradientAccumulator {
 public:
  explicit GradientAccumulator(const ParamLayout& layout)
      : layout_(layout), sums_(layout.size()), scratch_(layout.size()) {}

  std::span<double> scratch() noexcept { return scratch_; }

  void add_scaled_scratch(double weight) {
    for (std::size_t p = 0; p < sums_.size(); ++p) sums_[p].add(weight * scratch_[p]);
  }

  GradientEstimate mean(std::size_t n) const {
    std::vector<double> flat(sums_.size());
    for (std::size_t p = 0; p < flat.size(); ++p) {
      flat[p] = sums_[p].value() / static_cast<double>(n);
    }
    return GradientEstimate(layout_, std::move(flat));
  }

 private:
  ParamLayout layout_;
  std::vector<CompensatedSum> sums_;
  std::vector<double> scratch_;
};

}  // namespace

std::string_view to_string(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::PG ? "pg" : "capg";
}

std::optional<EstimatorKind> parse_estimator_kind(std::string_view text) noexcept {
  if (text == "pg") return EstimatorKind::PG;
  if (text == "capg") return EstimatorKind::CAPG;
  return std::nullopt;
}

Batch::Batch(std::vector<BatchEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("Batch: must be nonempty");
  const std::size_t d = entries_.front().action.size();
  const std::size_t k = entries_.front().state.size();
  for (const auto& e : entries_) {
    if (e.action.size() != d || e.state.size() != k) {
      throw std::invalid_argument("Batch: entries disagree on state or action dimension");
    }
    if (!std::isfinite(e.weight)) throw std::invalid_argument("Batch: non-finite weight");
  }
}

ScoreFn score_fn(EstimatorKind kind) {
  if (kind == EstimatorKind::PG) {
    return [](const GaussianPolicyParams& p, std::span<const double> s,
              std::span<const double> u, const ActionBounds&, std::span<double> out) {
      score_pg_into(p, s, u, out);
    };
  }
  return [](const GaussianPolicyParams& p, std::span<const double> s, std::span<const double> u,
            const ActionBounds& b, std::span<double> out) { score_capg_into(p, s, u, b, out); };
}

Batch apply_baseline(const Batch& batch, BaselineMode mode) {
  if (mode == BaselineMode::None) return batch;
  CompensatedSum total;
  for (const auto& e : batch.entries()) total.add(e.weight);
  const double baseline = total.value() / static_cast<double>(batch.size());
  std::vector<BatchEntry> out(batch.entries().begin(), batch.entries().end());
  for (auto& e : out) e.weight -= baseline;
  return Batch(std::move(out));
}

GradientEstimate estimate(const Batch& batch, const GaussianPolicyParams& params,
                          const ActionBounds& bounds, EstimatorKind kind) {
  return estimate_with(batch, params, bounds, score_fn(kind));
}

GradientEstimate estimate_with(const Batch& batch, const GaussianPolicyParams& params,
                               const ActionBounds& bounds, const ScoreFn& score) {
  check_entry_dims(batch.state_dim(), batch.action_dim(), params);
  GradientAccumulator acc(params.layout());
  for (const auto& e : batch.entries()) {
    score(params, e.state, e.action, bounds, acc.scratch());
    acc.add_scaled_scratch(e.weight);
  }
  return acc.mean(batch.size());
}

GradientEstimate estimate_decomposed(std::span<const DecomposedEntry> entries,
                                     const GaussianPolicyParams& params,
                                     const ActionBounds& bounds) {
  return estimate_decomposed_with(entries, params, bounds, score_fn(EstimatorKind::PG),
                                  score_fn(EstimatorKind::CAPG));
}

GradientEstimate estimate_decomposed_with(std::span<const DecomposedEntry> entries,
                                          const GaussianPolicyParams& params,
                                          const ActionBounds& bounds, const ScoreFn& pg,
                                          const ScoreFn& capg) {
  if (entries.empty()) throw std::invalid_argument("estimate_decomposed: empty batch");
  GradientAccumulator acc(params.layout());
  for (const auto& e : entries) {
    check_entry_dims(e.state.size(), e.action.size(), params);
    if (!std::isfinite(e.immediate_reward) || !std::isfinite(e.continuation_weight)) {
      throw std::invalid_argument("estimate_decomposed: non-finite weight");
    }
    pg(params, e.state, e.action, bounds, acc.scratch());
    acc.add_scaled_scratch(e.immediate_reward);
    capg(params, e.state, e.action, bounds, acc.scratch());
    acc.add_scaled_scratch(e.continuation_weight);
  }
  return acc.mean(entries.size());
}

}  // namespace capg
