#pragma once

#include <span>
#include <vector>

#include "sampler.hpp"

namespace bshrink::inference {

using sampler::ChainOutput;
using stat::Rng;

struct PosteriorSummary {
  double beta0_hat;
  Vector beta_ppm;
  Vector beta_pm;
  double p_lo = 0.025;
  double p_hi = 0.975;
};

struct Interval {
  double lo;
  double hi;
  double width() const noexcept { return hi - lo; }
};

// The noise term added to each predictive draw. StdDev gives
// beta0 + x^T beta + sigma * eps, consistent with the outcome model;
// Variance reproduces the literal sigma^2 * eps form.
enum class NoiseScale { StdDev, Variance };

// (sum_t M_t)^{-1} sum_t M_t beta_t with M_t = Sigma_x^(t) + mu_x^(t) mu_x^(t)^T.
Vector beta_ppm(const ChainOutput& chain);
Vector beta_ppm_weighted(std::span<const Matrix> weights, std::span<const Vector> betas);
// Per-draw weight matrices M_t used by beta_ppm.
std::vector<Matrix> ppm_weights(const ChainOutput& chain);
Vector beta_pm(const ChainOutput& chain);
double beta0_hat(const ChainOutput& chain);

PosteriorSummary summarize(const ChainOutput& chain, double p_lo = 0.025, double p_hi = 0.975);

// One predictive draw per stored posterior draw.
std::vector<double> predictive_draws(Rng& rng, const ChainOutput& chain, const Vector& x_new,
                                     NoiseScale noise = NoiseScale::StdDev);

// Linear interpolation between order statistics: with sorted draws
// x_(0) <= ... <= x_(T-1) and h = (T - 1) q, the q-quantile is
// x_(floor h) + (h - floor h) (x_(floor h + 1) - x_(floor h)).
double empirical_quantile(std::span<const double> sorted, double q);
Interval prediction_interval(std::span<const double> draws, double p_lo = 0.025,
                             double p_hi = 0.975);

double mspe(double beta0, const Vector& beta, const Vector& y, const Matrix& x);

// Fraction of y values inside their closed intervals.
double coverage(std::span<const Interval> intervals, std::span<const double> y);

}  // namespace bshrink::inference
