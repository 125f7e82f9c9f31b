#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace capg {

/// Per-dimension clip interval [lower_i, upper_i] of the executable action set.
class ActionBounds {
 public:
  /// Throws std::invalid_argument unless sizes match, d >= 1, all entries are
  /// finite and lower_i < upper_i.
  ActionBounds(std::vector<double> lower, std::vector<double> upper);

  /// [lo, hi]^d.
  static ActionBounds uniform(std::size_t dim, double lo, double hi);

  std::size_t dim() const noexcept { return lower_.size(); }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }

  bool operator==(const ActionBounds&) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Elementwise max(min(u, upper), lower).
std::vector<double> clip_action(std::span<const double> action, const ActionBounds& bounds);

}  // namespace capg
