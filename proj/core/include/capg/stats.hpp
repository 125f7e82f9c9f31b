#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace capg {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Streaming mean / variance (Welford).
class RunningMoments {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double stddev() const noexcept { return std::sqrt(variance()); }
  double std_error() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Per-coordinate RunningMoments over fixed-length vectors.
class VectorMoments {
 public:
  explicit VectorMoments(std::size_t dim) : moments_(dim) {}

  void add(std::span<const double> x) noexcept {
    for (std::size_t i = 0; i < moments_.size(); ++i) moments_[i].add(x[i]);
  }
  std::size_t dim() const noexcept { return moments_.size(); }
  const RunningMoments& operator[](std::size_t i) const { return moments_[i]; }

 private:
  std::vector<RunningMoments> moments_;
};

struct VarianceEstimate {
  double variance = 0.0;
  double std_error = 0.0;
};

/// Accumulates the first four raw moments so the sample variance can be
/// reported with its asymptotic standard error sqrt((mu4 - mu2^2) / n).
class FourthMoments {
 public:
  void add(double x) {
    ++n_;
    s1_.add(x);
    s2_.add(x * x);
    s3_.add(x * x * x);
    s4_.add(x * x * x * x);
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return s1_.value() / static_cast<double>(n_); }

  VarianceEstimate variance() const noexcept {
    const double n = static_cast<double>(n_);
    const double m = s1_.value() / n;
    const double e2 = s2_.value() / n;
    const double e3 = s3_.value() / n;
    const double e4 = s4_.value() / n;
    const double c2 = e2 - m * m;
    const double c4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m * m * m * m;
    const double var_of_var = std::max(c4 - c2 * c2, 0.0);
    return {c2 * n / (n - 1.0), std::sqrt(var_of_var / n)};
  }

 private:
  std::size_t n_ = 0;
  CompensatedSum s1_, s2_, s3_, s4_;
};

}  // namespace capg
