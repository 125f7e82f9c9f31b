#include "capg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capg {

ActionBounds::ActionBounds(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size()) {
    throw std::invalid_argument("ActionBounds: lower and upper must be nonempty and equal length");
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      throw std::invalid_argument("ActionBounds: need finite lower < upper in every dimension");
    }
  }
}

ActionBounds ActionBounds::uniform(std::size_t dim, double lo, double hi) {
  return ActionBounds(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

std::vector<double> clip_action(std::span<const double> action, const ActionBounds& bounds) {
  if (action.size() != bounds.dim()) {
    throw std::invalid_argument("clip_action: action and bounds dimension differ");
  }
  std::vector<double> out(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    out[i] = std::max(std::min(action[i], bounds.upper(i)), bounds.lower(i));
  }
  return out;
}

}  // namespace capg
