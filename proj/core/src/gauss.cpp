#include "capg/gauss.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace capg::gauss {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
constexpr double kTailSwitch = -5.0;

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) {
    throw std::domain_error(std::string(what) + ": non-finite argument");
  }
}

double guard(double z, Diagnostics* diag) {
  if (z > kZGuard || z < -kZGuard) {
    if (diag != nullptr) ++diag->clamped;
    return z > 0.0 ? kZGuard : -kZGuard;
  }
  return z;
}

// Mills ratio R(x) = (1 - Phi(x)) / phi(x) for x >= 5 via
//   R(x) = 1 / (x + 1 / (x + 2 / (x + 3 / (x + ...))))
// evaluated with the modified Lentz algorithm.
double mills_ratio_cf(double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 1000; ++k) {
    d = x + k * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + k / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return 1.0 / f;
}

}  // namespace

StandardizedPoint::StandardizedPoint(double z) : z_(z) {
  require_finite(z, "StandardizedPoint");
}

StandardizedPoint StandardizedPoint::from(double x, double mean, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::domain_error("StandardizedPoint: sigma must be positive and finite");
  }
  return StandardizedPoint((x - mean) / sigma);
}

double std_normal_pdf(double z) {
  require_finite(z, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double std_normal_log_pdf(double z) {
  require_finite(z, "std_normal_log_pdf");
  return -0.5 * z * z - kLogSqrt2Pi;
}

double std_normal_log_cdf(double z, Diagnostics* diag) {
  require_finite(z, "std_normal_log_cdf");
  z = guard(z, diag);
  if (z < kTailSwitch) {
    return -0.5 * z * z - kLogSqrt2Pi + std::log(mills_ratio_cf(-z));
  }
  if (z <= 0.0) {
    return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  }
  return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
}

double std_normal_log_sf(double z, Diagnostics* diag) {
  require_finite(z, "std_normal_log_sf");
  return std_normal_log_cdf(-z, diag);
}

double inv_mills_lower(double z, Diagnostics* diag) {
  require_finite(z, "inv_mills_lower");
  z = guard(z, diag);
  return std::exp(std_normal_log_pdf(z) - std_normal_log_cdf(z));
}

double inv_mills_upper(double z, Diagnostics* diag) {
  require_finite(z, "inv_mills_upper");
  return inv_mills_lower(-z, diag);
}

}  // namespace capg::gauss
