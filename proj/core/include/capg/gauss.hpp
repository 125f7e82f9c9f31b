#pragma once

#include <cstddef>

namespace capg::gauss {

/// Standardized inputs are clamped to [-kZGuard, kZGuard]. Beyond that the
/// tail probabilities are irrelevant for any policy worth training.
inline constexpr double kZGuard = 37.0;

/// Caller-owned counter of guard clamps. Pass one in to detect pathological
/// policies; the functions themselves carry no state.
struct Diagnostics {
  std::size_t clamped = 0;
};

/// A z-score (x - mu) / sigma. Construction rejects non-finite values and
/// non-positive or non-finite sigma.
class StandardizedPoint {
 public:
  explicit StandardizedPoint(double z);
  static StandardizedPoint from(double x, double mean, double sigma);

  double value() const noexcept { return z_; }

 private:
  double z_;
};

double std_normal_pdf(double z);
double std_normal_log_pdf(double z);

/// log Phi(z). Uses erfc near the center and the Laplace continued fraction
/// for the Mills ratio below z = -5, so the lower tail never underflows.
double std_normal_log_cdf(double z, Diagnostics* diag = nullptr);

/// log(1 - Phi(z)); delegates to std_normal_log_cdf(-z).
double std_normal_log_sf(double z, Diagnostics* diag = nullptr);

/// phi(z) / Phi(z), evaluated as exp(log phi(z) - log Phi(z)).
double inv_mills_lower(double z, Diagnostics* diag = nullptr);

/// phi(z) / (1 - Phi(z)); delegates to inv_mills_lower(-z).
double inv_mills_upper(double z, Diagnostics* diag = nullptr);

}  // namespace capg::gauss
