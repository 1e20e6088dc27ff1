#include "ridge_baseline.hpp"

#include <cmath>
#include <limits>

namespace bshrink::ridge {

namespace {

struct Centered {
  Matrix x;
  Vector y;
  Eigen::RowVectorXd x_mean;
  double y_mean;
};

Centered center(const Vector& y, const Matrix& x) {
  if (x.rows() != y.size() || x.rows() < 2 || x.cols() < 1)
    fail(ErrorCode::DimensionError, "ridge: need n >= 2 rows matching y and p >= 1");
  Centered c;
  c.x_mean = x.colwise().mean();
  c.y_mean = y.mean();
  c.x = x.rowwise() - c.x_mean;
  c.y = y.array() - c.y_mean;
  return c;
}

struct Svd {
  Matrix u;
  Vector d;
  Matrix v;
};

Svd thin_svd(const Matrix& x) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

double rank_tolerance(const Svd& s, const Matrix& x) {
  const double dmax = s.d.size() ? s.d.maxCoeff() : 0.0;
  return dmax * static_cast<double>(std::max(x.rows(), x.cols())) *
         std::numeric_limits<double>::epsilon();
}

Vector coefficients(const Svd& s, const Vector& yc, double lambda, double tol) {
  const Vector uty = s.u.transpose() * yc;
  Vector shrink(s.d.size());
  for (Eigen::Index i = 0; i < s.d.size(); ++i) {
    const double d = s.d[i];
    if (lambda == 0.0) {
      if (!(d > tol)) fail(ErrorCode::SingularDesign, "ridge: lambda = 0 with rank-deficient design");
      shrink[i] = 1.0 / d;
    } else {
      shrink[i] = d / (d * d + lambda);
    }
  }
  return s.v * shrink.cwiseProduct(uty);
}

}  // namespace

double hat_trace(const Vector& singular_values, double lambda) {
  double tr = 0.0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    const double d2 = singular_values[i] * singular_values[i];
    if (d2 > 0.0) tr += d2 / (d2 + lambda);
  }
  return tr;
}

RidgeFit ridge_fit(const Vector& y, const Matrix& x, double lambda) {
  if (!(lambda >= 0.0)) fail(ErrorCode::InvalidParameter, "ridge: lambda must be >= 0");
  const Centered c = center(y, x);
  if (lambda == 0.0 && x.cols() >= x.rows())
    fail(ErrorCode::SingularDesign, "ridge: lambda = 0 requires p < n");
  const Svd s = thin_svd(c.x);
  RidgeFit fit;
  fit.beta_hat = coefficients(s, c.y, lambda, rank_tolerance(s, c.x));
  fit.beta0_hat = c.y_mean - c.x_mean.dot(fit.beta_hat);
  fit.lambda_star = lambda;
  return fit;
}

RidgeFit gcv_select(const Vector& y, const Matrix& x, std::span<const double> grid) {
  if (grid.empty()) fail(ErrorCode::EmptyGrid, "gcv: empty lambda grid");
  const Centered c = center(y, x);
  const Svd s = thin_svd(c.x);
  const double n = static_cast<double>(x.rows());
  const Vector uty = s.u.transpose() * c.y;

  RidgeFit fit;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    if (!(lambda >= 0.0)) fail(ErrorCode::InvalidParameter, "gcv: negative lambda in grid");
    Vector fitted_coef(s.d.size());
    for (Eigen::Index i = 0; i < s.d.size(); ++i) {
      const double d2 = s.d[i] * s.d[i];
      fitted_coef[i] = d2 > 0.0 ? d2 / (d2 + lambda) : 0.0;
    }
    const Vector resid = c.y - s.u * fitted_coef.cwiseProduct(uty);
    const double denom = 1.0 - hat_trace(s.d, lambda) / n;
    const double score = denom > 0.0 ? (resid.squaredNorm() / n) / (denom * denom)
                                     : std::numeric_limits<double>::infinity();
    fit.gcv_curve.push_back({lambda, score});
    if (score < best) {
      best = score;
      fit.lambda_star = lambda;
    }
  }
  if (!std::isfinite(best)) fail(ErrorCode::SingularDesign, "gcv: no grid point has a finite score");
  fit.beta_hat = coefficients(s, c.y, fit.lambda_star, rank_tolerance(s, c.x));
  fit.beta0_hat = c.y_mean - c.x_mean.dot(fit.beta_hat);
  return fit;
}

std::vector<double> default_grid(const Matrix& x, int points) {
  if (points < 1) fail(ErrorCode::EmptyGrid, "gcv: grid needs at least one point");
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const double mean_eig = xc.squaredNorm() / static_cast<double>(x.cols());
  std::vector<double> grid;
  grid.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double e = points == 1 ? 0.0 : -4.0 + 8.0 * i / (points - 1);
    grid.push_back(mean_eig * std::pow(10.0, e));
  }
  return grid;
}

}  // namespace bshrink::ridge
