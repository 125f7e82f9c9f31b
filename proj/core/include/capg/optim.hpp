#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace capg {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamHyper&) const = default;
};

/// Adam moments for one flattened parameter vector.
struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  AdamHyper hyper;

  static AdamState zeros(std::size_t num_params, AdamHyper hyper = {});

  bool operator==(const AdamState&) const = default;
};

enum class Direction { Ascend, Descend };

struct AdamUpdate {
  AdamState state;
  std::vector<double> params;
};

/// One bias-corrected Adam update with epsilon added after the square root:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   theta <- theta +/- lr * m_hat / (sqrt(v_hat) + eps)
/// Throws std::invalid_argument on shape mismatch or non-finite gradient.
AdamUpdate adam_step(const AdamState& state, std::span<const double> params,
                     std::span<const double> gradient, Direction direction);

/// Text snapshot; reals are written in shortest round-trip form so a reload
/// continues bit-identically.
void write_adam_state(std::ostream& os, const AdamState& state);
AdamState read_adam_state(std::istream& is);

}  // namespace capg
