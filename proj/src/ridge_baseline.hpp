#pragma once

#include <span>
#include <vector>

#include "stat_core.hpp"

namespace bshrink::ridge {

struct GcvPoint {
  double lambda;
  double score;
};

struct RidgeFit {
  double beta0_hat = 0.0;
  Vector beta_hat;
  double lambda_star = 0.0;
  std::vector<GcvPoint> gcv_curve;
};

// Ridge on centered data; the intercept is unpenalized:
// beta = (Xc^T Xc + lambda I)^{-1} Xc^T yc, beta0 = ybar - xbar^T beta.
// Throws SingularDesign for lambda = 0 with a rank-deficient centered design.
RidgeFit ridge_fit(const Vector& y, const Matrix& x, double lambda);

// GCV(lambda) = (1/n) |yc - H yc|^2 / (1 - tr(H)/n)^2 with
// H = Xc (Xc^T Xc + lambda I)^{-1} Xc^T, minimized over the grid.
RidgeFit gcv_select(const Vector& y, const Matrix& x, std::span<const double> grid);

// 50 log-spaced points over [1e-4, 1e4] times the mean eigenvalue of Xc^T Xc.
std::vector<double> default_grid(const Matrix& x, int points = 50);

// tr(H_lambda) = sum_i d_i^2 / (d_i^2 + lambda) over singular values d_i of Xc.
double hat_trace(const Vector& singular_values, double lambda);

}  // namespace bshrink::ridge
