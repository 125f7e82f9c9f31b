#include "capg/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "capg/gauss.hpp"

namespace capg {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

void check_dims(const GaussianPolicyParams& params, std::span<const double> state,
                std::span<const double> action, const char* what) {
  if (state.size() != params.state_dim()) {
    throw std::invalid_argument(std::string(what) + ": state has " + std::to_string(state.size()) +
                                " features, policy expects " + std::to_string(params.state_dim()));
  }
  if (action.size() != params.action_dim()) {
    throw std::invalid_argument(std::string(what) + ": action has " +
                                std::to_string(action.size()) + " dims, policy expects " +
                                std::to_string(params.action_dim()));
  }
}

void check_bounds(const GaussianPolicyParams& params, const ActionBounds& bounds,
                  const char* what) {
  if (bounds.dim() != params.action_dim()) {
    throw std::invalid_argument(std::string(what) + ": bounds dimension differs from policy");
  }
}

// Spreads per-dimension scores over the flat layout via the chain rule
// d/dw_ij = d/dmu_i * s_j.
template <typename DimFn>
void scatter_scores(const GaussianPolicyParams& params, std::span<const double> state,
                    std::span<double> out, DimFn&& dim_fn) {
  const ParamLayout& layout = params.layout();
  if (out.size() != layout.size()) {
    throw std::invalid_argument("score: output buffer has wrong size");
  }
  const std::size_t k = layout.state_dim;
  for (std::size_t i = 0; i < layout.action_dim; ++i) {
    const DimScore ds = dim_fn(i);
    double* row = out.data() + i * (k + 1);
    for (std::size_t j = 0; j < k; ++j) row[j] = ds.d_mean * state[j];
    row[k] = ds.d_mean;
    out[layout.log_std_index(i)] = ds.d_log_std;
  }
}

}  // namespace

Gradient::Gradient(ParamLayout layout, std::vector<double> flat)
    : layout_(layout), values_(std::move(flat)) {
  if (values_.size() != layout_.size()) {
    throw std::invalid_argument("Gradient: flat vector does not match layout");
  }
}

GaussianPolicyParams::GaussianPolicyParams(ParamLayout layout, std::vector<double> flat)
    : layout_(layout), values_(std::move(flat)) {
  if (layout_.action_dim == 0) {
    throw std::invalid_argument("GaussianPolicyParams: action dimension must be >= 1");
  }
  if (values_.size() != layout_.size()) {
    throw std::invalid_argument("GaussianPolicyParams: flat vector does not match layout");
  }
  for (const double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("GaussianPolicyParams: non-finite parameter");
  }
  for (std::size_t i = 0; i < layout_.action_dim; ++i) {
    if (log_std(i) < kMinLogStd) {
      throw std::invalid_argument("GaussianPolicyParams: log_std below floor of -20");
    }
  }
}

GaussianPolicyParams GaussianPolicyParams::state_independent(std::vector<double> mean,
                                                             std::vector<double> log_std) {
  if (mean.size() != log_std.size()) {
    throw std::invalid_argument("GaussianPolicyParams: mean and log_std sizes differ");
  }
  std::vector<double> flat = std::move(mean);
  flat.insert(flat.end(), log_std.begin(), log_std.end());
  return GaussianPolicyParams(ParamLayout{log_std.size(), 0}, std::move(flat));
}

GaussianPolicyParams GaussianPolicyParams::isotropic(std::size_t dim, double mean,
                                                     double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("GaussianPolicyParams: variance must be > 0");
  return state_independent(std::vector<double>(dim, mean),
                           std::vector<double>(dim, 0.5 * std::log(variance)));
}

double GaussianPolicyParams::sigma(std::size_t i) const { return std::exp(log_std(i)); }

double GaussianPolicyParams::mean(std::size_t i, std::span<const double> state) const {
  const std::size_t k = layout_.state_dim;
  const double* row = values_.data() + i * (k + 1);
  double mu = row[k];
  for (std::size_t j = 0; j < k; ++j) mu += row[j] * state[j];
  return mu;
}

std::vector<double> GaussianPolicyParams::mean(std::span<const double> state) const {
  if (state.size() != layout_.state_dim) {
    throw std::invalid_argument("GaussianPolicyParams::mean: wrong state size");
  }
  std::vector<double> mu(layout_.action_dim);
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = mean(i, state);
  return mu;
}

GaussianPolicyParams GaussianPolicyParams::with_flat(std::vector<double> flat) const {
  return GaussianPolicyParams(layout_, std::move(flat));
}

DimScore dim_score_pg(double action, double mean, double log_std) {
  const double inv_sigma = std::exp(-log_std);
  const double z = (action - mean) * inv_sigma;
  return {z * inv_sigma, z * z - 1.0};
}

DimScore dim_score_capg(double action, double mean, double log_std, double lower,
                        double upper) {
  const double sigma = std::exp(log_std);
  if (action <= lower) {
    const double z = (lower - mean) / sigma;
    const double lambda = gauss::inv_mills_lower(z);
    return {-lambda / sigma, -z * lambda};
  }
  if (action >= upper) {
    const double z = (upper - mean) / sigma;
    const double lambda = gauss::inv_mills_upper(z);
    return {lambda / sigma, z * lambda};
  }
  return dim_score_pg(action, mean, log_std);
}

std::vector<double> sample_action(const GaussianPolicyParams& params,
                                  std::span<const double> state, Rng& rng) {
  std::vector<double> u = params.mean(state);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += params.sigma(i) * rng.normal();
  return u;
}

std::vector<double> sample_clipped(const GaussianPolicyParams& params,
                                   std::span<const double> state, const ActionBounds& bounds,
                                   Rng& rng) {
  check_bounds(params, bounds, "sample_clipped");
  return clip_action(sample_action(params, state, rng), bounds);
}

double log_prob(const GaussianPolicyParams& params, std::span<const double> state,
                std::span<const double> action) {
  check_dims(params, state, action, "log_prob");
  double total = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    const double z = (action[i] - params.mean(i, state)) / params.sigma(i);
    total += -params.log_std(i) - kLogSqrt2Pi - 0.5 * z * z;
  }
  return total;
}

double log_prob_clipped(const GaussianPolicyParams& params, std::span<const double> state,
                        std::span<const double> clipped_action, const ActionBounds& bounds) {
  check_dims(params, state, clipped_action, "log_prob_clipped");
  check_bounds(params, bounds, "log_prob_clipped");
  double total = 0.0;
  for (std::size_t i = 0; i < clipped_action.size(); ++i) {
    const double u = clipped_action[i];
    const double lo = bounds.lower(i);
    const double hi = bounds.upper(i);
    if (!(u >= lo && u <= hi)) {
      throw std::domain_error("log_prob_clipped: action outside bounds");
    }
    const double mu = params.mean(i, state);
    const double sigma = params.sigma(i);
    if (u == lo) {
      total += gauss::std_normal_log_cdf((lo - mu) / sigma);
    } else if (u == hi) {
      total += gauss::std_normal_log_sf((hi - mu) / sigma);
    } else {
      const double z = (u - mu) / sigma;
      total += -params.log_std(i) - kLogSqrt2Pi - 0.5 * z * z;
    }
  }
  return total;
}

void score_pg_into(const GaussianPolicyParams& params, std::span<const double> state,
                   std::span<const double> action, std::span<double> out) {
  check_dims(params, state, action, "score_pg");
  scatter_scores(params, state, out, [&](std::size_t i) {
    return dim_score_pg(action[i], params.mean(i, state), params.log_std(i));
  });
}

void score_capg_into(const GaussianPolicyParams& params, std::span<const double> state,
                     std::span<const double> action, const ActionBounds& bounds,
                     std::span<double> out) {
  check_dims(params, state, action, "score_capg");
  check_bounds(params, bounds, "score_capg");
  scatter_scores(params, state, out, [&](std::size_t i) {
    return dim_score_capg(action[i], params.mean(i, state), params.log_std(i), bounds.lower(i),
                          bounds.upper(i));
  });
}

ScoreResult score_pg(const GaussianPolicyParams& params, std::span<const double> state,
                     std::span<const double> action) {
  ScoreResult out(params.layout());
  score_pg_into(params, state, action, out.flat());
  return out;
}

ScoreResult score_capg(const GaussianPolicyParams& params, std::span<const double> state,
                       std::span<const double> action, const ActionBounds& bounds) {
  ScoreResult out(params.layout());
  score_capg_into(params, state, action, bounds, out.flat());
  return out;
}

}  // namespace capg
