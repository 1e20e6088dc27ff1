#include "inference.hpp"

#include <algorithm>
#include <cmath>

namespace bshrink::inference {

namespace {

void require_draws(const ChainOutput& chain) {
  if (chain.draws.empty()) fail(ErrorCode::InvalidParameter, "chain has no stored draws");
}

}  // namespace

std::vector<Matrix> ppm_weights(const ChainOutput& chain) {
  std::vector<Matrix> weights;
  weights.reserve(chain.draws.size());
  for (const auto& d : chain.draws)
    weights.push_back(d.sigma_x_inv.inverse() + d.mu_x * d.mu_x.transpose());
  return weights;
}

Vector beta_ppm_weighted(std::span<const Matrix> weights, std::span<const Vector> betas) {
  if (weights.empty() || weights.size() != betas.size())
    fail(ErrorCode::InvalidParameter, "beta_ppm: need one weight matrix per beta draw");
  const Eigen::Index p = betas.front().size();
  Matrix total = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  for (size_t t = 0; t < weights.size(); ++t) {
    total += weights[t];
    rhs.noalias() += weights[t] * betas[t];
  }
  return stat::SpdMatrix::symmetrized(total).solve(rhs);
}

Vector beta_ppm(const ChainOutput& chain) {
  require_draws(chain);
  std::vector<Vector> betas;
  betas.reserve(chain.draws.size());
  for (const auto& d : chain.draws) betas.push_back(d.beta);
  const std::vector<Matrix> weights = ppm_weights(chain);
  return beta_ppm_weighted(weights, betas);
}

Vector beta_pm(const ChainOutput& chain) {
  require_draws(chain);
  Vector sum = Vector::Zero(chain.draws.front().beta.size());
  for (const auto& d : chain.draws) sum += d.beta;
  return sum / static_cast<double>(chain.draws.size());
}

double beta0_hat(const ChainOutput& chain) {
  require_draws(chain);
  double sum = 0.0;
  for (const auto& d : chain.draws) sum += d.beta0;
  return sum / static_cast<double>(chain.draws.size());
}

PosteriorSummary summarize(const ChainOutput& chain, double p_lo, double p_hi) {
  if (!(0.0 < p_lo && p_lo < p_hi && p_hi < 1.0))
    fail(ErrorCode::InvalidParameter, "interval levels must satisfy 0 < p_lo < p_hi < 1");
  return PosteriorSummary{beta0_hat(chain), beta_ppm(chain), beta_pm(chain), p_lo, p_hi};
}

std::vector<double> predictive_draws(Rng& rng, const ChainOutput& chain, const Vector& x_new,
                                     NoiseScale noise) {
  require_draws(chain);
  std::vector<double> out;
  out.reserve(chain.draws.size());
  for (const auto& d : chain.draws) {
    if (x_new.size() != d.beta.size())
      fail(ErrorCode::DimensionError, "predictive draw: x_new has wrong length");
    const double scale = noise == NoiseScale::StdDev ? std::sqrt(d.sigma2) : d.sigma2;
    out.push_back(d.beta0 + x_new.dot(d.beta) + scale * rng.normal());
  }
  return out;
}

double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::InvalidParameter, "quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorCode::InvalidParameter, "quantile level outside [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const size_t lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Interval prediction_interval(std::span<const double> draws, double p_lo, double p_hi) {
  if (!(0.0 < p_lo && p_lo < p_hi && p_hi < 1.0))
    fail(ErrorCode::InvalidParameter, "interval levels must satisfy 0 < p_lo < p_hi < 1");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  return {empirical_quantile(sorted, p_lo), empirical_quantile(sorted, p_hi)};
}

double mspe(double beta0, const Vector& beta, const Vector& y, const Matrix& x) {
  if (x.rows() != y.size() || x.cols() != beta.size())
    fail(ErrorCode::DimensionError, "mspe: dimension mismatch");
  if (y.size() == 0) fail(ErrorCode::InvalidParameter, "mspe: empty validation set");
  const Vector r = (y - x * beta).array() - beta0;
  return r.squaredNorm() / static_cast<double>(y.size());
}

double coverage(std::span<const Interval> intervals, std::span<const double> y) {
  if (intervals.size() != y.size() || y.empty())
    fail(ErrorCode::InvalidParameter, "coverage: need one interval per validation point");
  size_t inside = 0;
  for (size_t i = 0; i < y.size(); ++i)
    if (intervals[i].lo <= y[i] && y[i] <= intervals[i].hi) ++inside;
  return static_cast<double>(inside) / static_cast<double>(y.size());
}

}  // namespace bshrink::inference
