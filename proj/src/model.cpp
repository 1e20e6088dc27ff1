#include "model.hpp"

#include <cmath>
#include <sstream>

namespace bshrink::model {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)
constexpr double kTau2RateFloor = 1e-12;

void require_rows(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << what << ": expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    fail(ErrorCode::DimensionError, msg.str());
  }
}

void check_xb(const Dataset& data, const Matrix& xb) {
  require_rows(xb, data.n_b(), data.p(), "imputed x_B");
}

// Gram matrix X^T X + kappa I and X^T (y - beta0) over the stacked rows.
BetaLaw beta_law(const Dataset& data, const Matrix& xb, const Phi& phi, double kappa) {
  check_xb(data, xb);
  const Eigen::Index p = data.p();
  Matrix gram = data.x_a.transpose() * data.x_a;
  gram.noalias() += xb.transpose() * xb;
  gram.diagonal().array() += kappa;
  const Vector rhs = data.x_a.transpose() * (data.y_a.array() - phi.beta0).matrix() +
                     xb.transpose() * (data.y_b.array() - phi.beta0).matrix();
  try {
    SpdMatrix g = SpdMatrix::symmetrized(gram);
    Vector mean = g.solve(rhs);
    return BetaLaw{std::move(mean), std::move(g), phi.sigma2};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    std::ostringstream msg;
    msg << "beta step: design gram is singular (p = " << p << ", n = " << data.n()
        << ", kappa = " << kappa << ")";
    fail(ErrorCode::SingularDesign, msg.str());
  }
}

Vector draw_beta(Rng& rng, const BetaLaw& law) {
  const Vector z = stat::standard_normal_vector(rng, law.mean.size());
  const Vector u = law.gram.factor().triangularView<Eigen::Lower>().transpose().solve(z);
  return law.mean + std::sqrt(law.sigma2) * u;
}

Vector residuals(const Dataset& data, const Matrix& xb, const Phi& phi) {
  Vector r(data.n());
  r.head(data.n_a()) = (data.y_a - data.x_a * phi.beta).array() - phi.beta0;
  r.tail(data.n_b()) = (data.y_b - xb * phi.beta).array() - phi.beta0;
  return r;
}

// Sufficient statistics of the (1, x) -> w regression over one column, or
// over every column for the scalar variant. Column-outer, row-inner so the
// scalar and single-column per-gene sums agree bit for bit when p = 1.
struct MeSums {
  double n = 0, sx = 0, sxx = 0, sw = 0, sxw = 0;
};

void accumulate(MeSums& s, const Matrix& x, const Matrix& w, Eigen::Index j) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double xv = x(i, j);
    const double wv = w(i, j);
    s.n += 1.0;
    s.sx += xv;
    s.sxx += xv * xv;
    s.sw += wv;
    s.sxw += xv * wv;
  }
}

MeSums me_sums(const Dataset& data, const Matrix& xb, MeVariant variant, Eigen::Index column) {
  MeSums s;
  const Eigen::Index first = variant == MeVariant::Scalar ? 0 : column;
  const Eigen::Index last = variant == MeVariant::Scalar ? data.p() : column + 1;
  for (Eigen::Index j = first; j < last; ++j) {
    accumulate(s, data.x_a, data.w_a, j);
    accumulate(s, xb, data.w_b, j);
  }
  return s;
}

Vector draw_gaussian(Rng& rng, const GaussianLaw& law) {
  return stat::sample_mvnormal_precision(rng, law.mean, law.precision);
}

}  // namespace

void Dataset::validate() const {
  const Eigen::Index cols = x_a.cols();
  if (n_a() < 1) fail(ErrorCode::DimensionError, "dataset: subsample A must be non-empty");
  if (cols < 1) fail(ErrorCode::DimensionError, "dataset: p must be positive");
  require_rows(x_a, n_a(), cols, "x_A");
  require_rows(w_a, n_a(), cols, "w_A");
  require_rows(w_b, n_b(), cols, "w_B");
  stat::require_finite({y_a.data(), static_cast<size_t>(y_a.size())}, "y_A");
  stat::require_finite({x_a.data(), static_cast<size_t>(x_a.size())}, "x_A");
  stat::require_finite({w_a.data(), static_cast<size_t>(w_a.size())}, "w_A");
  stat::require_finite({y_b.data(), static_cast<size_t>(y_b.size())}, "y_B");
  stat::require_finite({w_b.data(), static_cast<size_t>(w_b.size())}, "w_B");
}

MeParams MeParams::scalar(double psi, double nu, double tau2) {
  MeParams me;
  me.variant = MeVariant::Scalar;
  me.psi = Vector::Constant(1, psi);
  me.nu = Vector::Constant(1, nu);
  me.tau2 = tau2;
  return me;
}

MeParams MeParams::per_gene(Vector psi, Vector nu, double tau2) {
  if (psi.size() != nu.size())
    fail(ErrorCode::DimensionError, "per-gene ME: psi and nu lengths differ");
  MeParams me;
  me.variant = MeVariant::PerGene;
  me.psi = std::move(psi);
  me.nu = std::move(nu);
  me.tau2 = tau2;
  return me;
}

void Phi::validate() const {
  const Eigen::Index p = beta.size();
  if (!(sigma2 > 0.0)) fail(ErrorCode::InvalidParameter, "phi: sigma2 must be positive");
  if (!(me.tau2 > 0.0)) fail(ErrorCode::InvalidParameter, "phi: tau2 must be positive");
  if (mu_x.size() != p || sigma_x_inv.dim() != p)
    fail(ErrorCode::DimensionError, "phi: inconsistent dimensions");
  const Eigen::Index me_len = me.variant == MeVariant::Scalar ? 1 : p;
  if (me.psi.size() != me_len || me.nu.size() != me_len)
    fail(ErrorCode::DimensionError, "phi: ME parameter length mismatch");
}

Matrix stacked_x(const Dataset& data, const Matrix& xb) {
  check_xb(data, xb);
  Matrix x(data.n(), data.p());
  x.topRows(data.n_a()) = data.x_a;
  x.bottomRows(data.n_b()) = xb;
  return x;
}

Vector stacked_y(const Dataset& data) {
  Vector y(data.n());
  y.head(data.n_a()) = data.y_a;
  y.tail(data.n_b()) = data.y_b;
  return y;
}

Matrix stacked_w(const Dataset& data) {
  Matrix w(data.n(), data.p());
  w.topRows(data.n_a()) = data.w_a;
  w.bottomRows(data.n_b()) = data.w_b;
  return w;
}

double complete_log_likelihood(const Dataset& data, const Matrix& xb, const Phi& phi) {
  const Matrix x = stacked_x(data, xb);
  const Matrix w = stacked_w(data);
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();

  const Vector r = residuals(data, xb, phi);
  double ll = -0.5 * static_cast<double>(n) * (kLog2Pi + std::log(phi.sigma2)) -
              0.5 * r.squaredNorm() / phi.sigma2;

  double sse_w = 0.0;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = w(i, j) - phi.me.psi_at(j) - phi.me.nu_at(j) * x(i, j);
      sse_w += e * e;
    }
  ll += -0.5 * static_cast<double>(n * p) * (kLog2Pi + std::log(phi.me.tau2)) -
        0.5 * sse_w / phi.me.tau2;

  const Matrix centered = x.rowwise() - phi.mu_x.transpose();
  const double quad = (centered * phi.sigma_x_inv.matrix()).cwiseProduct(centered).sum();
  ll += -0.5 * static_cast<double>(n * p) * kLog2Pi +
        0.5 * static_cast<double>(n) * phi.sigma_x_inv.log_det() - 0.5 * quad;

  if (!std::isfinite(ll)) fail(ErrorCode::NonFinite, "complete log-likelihood is not finite");
  return ll;
}

ImputationLaw imputation_law(const Dataset& data, const Phi& phi) {
  const Eigen::Index p = data.p();
  const Eigen::Index nb = data.n_b();
  Vector nu(p), psi(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    nu[j] = phi.me.nu_at(j);
    psi[j] = phi.me.psi_at(j);
  }

  Matrix precision = phi.beta * phi.beta.transpose() / phi.sigma2 + phi.sigma_x_inv.matrix();
  precision.diagonal().array() += nu.array().square() / phi.me.tau2;

  // Gamma(phi) is an inverse of PSD + PD; failure here means phi is invalid.
  SpdMatrix gamma = SpdMatrix::symmetrized(SpdMatrix::symmetrized(precision).inverse());

  Matrix rhs(nb, p);
  const Vector prior_term = phi.sigma_x_inv.matrix() * phi.mu_x;
  for (Eigen::Index i = 0; i < nb; ++i) {
    const double y_weight = (data.y_b[i] - phi.beta0) / phi.sigma2;
    for (Eigen::Index j = 0; j < p; ++j)
      rhs(i, j) = y_weight * phi.beta[j] + (data.w_b(i, j) - psi[j]) * nu[j] / phi.me.tau2 +
                  prior_term[j];
  }
  Matrix mean = rhs * gamma.matrix();
  return ImputationLaw{std::move(mean), std::move(gamma)};
}

Matrix step_impute_xB(Rng& rng, const Dataset& data, const Phi& phi) {
  ImputationLaw law = imputation_law(data, phi);
  const Eigen::Index nb = data.n_b();
  const Eigen::Index p = data.p();
  Matrix z(nb, p);
  for (Eigen::Index i = 0; i < nb; ++i)
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  Matrix xb = std::move(law.mean);
  xb.noalias() += z * law.cov.factor().triangularView<Eigen::Lower>().transpose();
  return xb;
}

BetaLaw beta_flat_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                      const Priors& priors) {
  if (data.p() > data.n()) {
    std::ostringstream msg;
    msg << "flat beta prior needs p <= n_A + n_B (p = " << data.p() << ", n = " << data.n() << ")";
    fail(ErrorCode::SingularDesign, msg.str());
  }
  return beta_law(data, xb, phi, phi.sigma2 * priors.beta_precision);
}

Vector step_beta_flat(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                      const Priors& priors) {
  return draw_beta(rng, beta_flat_law(data, xb, phi, priors));
}

BetaLaw beta_ridge_law(const Dataset& data, const Matrix& xb, const Phi& phi, double lambda) {
  if (!(lambda >= 0.0)) fail(ErrorCode::InvalidParameter, "ridge beta step: lambda must be >= 0");
  return beta_law(data, xb, phi, lambda);
}

Vector step_beta_ridge(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                       double lambda) {
  return draw_beta(rng, beta_ridge_law(data, xb, phi, lambda));
}

ScalarNormalLaw beta0_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                          const Priors& priors) {
  check_xb(data, xb);
  const double sum = (data.y_a - data.x_a * phi.beta).sum() + (data.y_b - xb * phi.beta).sum();
  const double denom = static_cast<double>(data.n()) + phi.sigma2 * priors.beta0_precision;
  return {sum / denom, phi.sigma2 / denom};
}

double step_beta0(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                  const Priors& priors) {
  const ScalarNormalLaw law = beta0_law(data, xb, phi, priors);
  return law.mean + std::sqrt(law.variance) * rng.normal();
}

InverseGammaLaw sigma2_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                           BetaPrior beta_prior, double lambda, const Priors& priors) {
  check_xb(data, xb);
  const double rss = residuals(data, xb, phi).squaredNorm();
  double shape = priors.sigma2_shape + 0.5 * static_cast<double>(data.n());
  double rate = priors.sigma2_rate + 0.5 * rss;
  if (beta_prior == BetaPrior::Ridge) {
    shape += 0.5 * static_cast<double>(data.p());
    rate += 0.5 * lambda * phi.beta.squaredNorm();
  }
  if (!(shape > 0.0) || !(rate > 0.0)) {
    std::ostringstream msg;
    msg << "sigma2 step: degenerate inverse-gamma (shape " << shape << ", rate " << rate << ")";
    fail(ErrorCode::InvalidParameter, msg.str());
  }
  return {shape, rate};
}

double step_sigma2(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                   BetaPrior beta_prior, double lambda, const Priors& priors) {
  const InverseGammaLaw law = sigma2_law(data, xb, phi, beta_prior, lambda, priors);
  return stat::sample_inverse_gamma(rng, law.shape, law.rate);
}

GaussianLaw me_coefficient_law(const Dataset& data, const Matrix& xb, double tau2,
                               MeVariant variant, Eigen::Index column, const Priors& priors) {
  check_xb(data, xb);
  const MeSums s = me_sums(data, xb, variant, column);
  const double centered_ss = s.sxx - s.sx * s.sx / s.n;
  if (priors.me_precision == 0.0 && !(centered_ss > 1e-12 * std::max(1.0, s.sxx))) {
    std::ostringstream msg;
    msg << "ME step: x is constant";
    if (variant == MeVariant::PerGene) msg << " in column " << column;
    fail(ErrorCode::SingularDesign, msg.str());
  }
  const double ridge = tau2 * priors.me_precision;
  Matrix gram(2, 2);
  gram << s.n + ridge, s.sx, s.sx, s.sxx + ridge;
  Vector rhs(2);
  rhs << s.sw + ridge * priors.psi_mean, s.sxw + ridge * priors.nu_mean;
  const SpdMatrix g(gram);
  Vector mean = g.solve(rhs);
  return GaussianLaw{std::move(mean), SpdMatrix(gram / tau2)};
}

MeParams step_me_params(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                        const Priors& priors, StepDiagnostics* diagnostics) {
  const Eigen::Index p = data.p();
  const MeVariant variant = phi.me.variant;
  const Eigen::Index blocks = variant == MeVariant::Scalar ? 1 : p;
  Vector psi(blocks), nu(blocks);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Vector coef =
        draw_gaussian(rng, me_coefficient_law(data, xb, phi.me.tau2, variant, b, priors));
    psi[b] = coef[0];
    nu[b] = coef[1];
  }

  double sse = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index b = variant == MeVariant::Scalar ? 0 : j;
    for (Eigen::Index i = 0; i < data.n_a(); ++i) {
      const double e = data.w_a(i, j) - psi[b] - nu[b] * data.x_a(i, j);
      sse += e * e;
    }
    for (Eigen::Index i = 0; i < data.n_b(); ++i) {
      const double e = data.w_b(i, j) - psi[b] - nu[b] * xb(i, j);
      sse += e * e;
    }
  }
  const double shape = priors.tau2_shape + 0.5 * static_cast<double>(data.n() * p);
  double rate = priors.tau2_rate + 0.5 * sse;
  if (!(rate > kTau2RateFloor)) {
    rate = kTau2RateFloor;
    if (diagnostics) ++diagnostics->tau2_rate_floored;
  }
  const double tau2 = stat::sample_inverse_gamma(rng, shape, rate);
  MeParams out;
  out.variant = variant;
  out.psi = std::move(psi);
  out.nu = std::move(nu);
  out.tau2 = tau2;
  return out;
}

GaussianLaw mu_x_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                     const Priors& priors) {
  check_xb(data, xb);
  const double n = static_cast<double>(data.n());
  const Vector sum = data.x_a.colwise().sum().transpose() + xb.colwise().sum().transpose();
  Matrix precision = n * phi.sigma_x_inv.matrix();
  if (priors.mu_x_precision == 0.0) return GaussianLaw{sum / n, SpdMatrix(std::move(precision))};
  precision.diagonal().array() += priors.mu_x_precision;
  SpdMatrix q(std::move(precision));
  Vector mean = q.solve(Vector(phi.sigma_x_inv.matrix() * sum));
  return GaussianLaw{std::move(mean), std::move(q)};
}

Vector step_mu_x(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                 const Priors& priors) {
  return draw_gaussian(rng, mu_x_law(data, xb, phi, priors));
}

WishartLaw sigma_x_inv_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                           const SpdMatrix& inv_scale) {
  check_xb(data, xb);
  if (inv_scale.dim() != data.p())
    fail(ErrorCode::DimensionError, "Sigma_x^{-1} step: inverse scale has wrong dimension");
  const Matrix ca = data.x_a.rowwise() - phi.mu_x.transpose();
  const Matrix cb = xb.rowwise() - phi.mu_x.transpose();
  Matrix post = inv_scale.matrix();
  post.noalias() += ca.transpose() * ca;
  post.noalias() += cb.transpose() * cb;
  return WishartLaw{prior_dof(data.p()) + static_cast<double>(data.n()),
                    SpdMatrix::symmetrized(post)};
}

SpdMatrix step_sigma_x_inv(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                           const SpdMatrix& inv_scale) {
  const WishartLaw law = sigma_x_inv_law(data, xb, phi, inv_scale);
  return stat::sample_wishart_inverse_scale(rng, law.dof, law.inv_scale);
}

double step_lambda_daplus(Rng& rng, const Phi& phi) {
  const double bb = phi.beta.squaredNorm();
  if (!(bb > 0.0)) fail(ErrorCode::DegenerateBeta, "lambda step: beta^T beta is zero");
  const double p = static_cast<double>(phi.beta.size());
  return stat::sample_gamma(rng, 0.5 * p, 0.5 * bb / phi.sigma2);
}

double ewig_update_lambda(std::span<const Vector> betas, std::span<const double> sigma2s) {
  if (betas.empty() || betas.size() != sigma2s.size())
    fail(ErrorCode::InvalidParameter, "lambda update: need K >= 1 paired (beta, sigma2) draws");
  double sum = 0.0;
  for (size_t k = 0; k < betas.size(); ++k) sum += betas[k].squaredNorm() / sigma2s[k];
  if (!(sum > 0.0)) fail(ErrorCode::DegenerateBeta, "lambda update: every beta draw is zero");
  const double p = static_cast<double>(betas.front().size());
  return p / (sum / static_cast<double>(betas.size()));
}

Vector ewig_update_Lambda(std::span<const Vector> sigma_x_inv_diagonals) {
  if (sigma_x_inv_diagonals.empty())
    fail(ErrorCode::InvalidParameter, "Lambda update: need K >= 1 draws");
  const Eigen::Index p = sigma_x_inv_diagonals.front().size();
  Vector mean = Vector::Zero(p);
  for (const Vector& d : sigma_x_inv_diagonals) mean += d;
  mean /= static_cast<double>(sigma_x_inv_diagonals.size());
  return (3.0 * static_cast<double>(p)) * mean.cwiseInverse();
}

Vector ewig_update_Lambda(std::span<const SpdMatrix> sigma_x_inv_draws) {
  std::vector<Vector> diagonals;
  diagonals.reserve(sigma_x_inv_draws.size());
  for (const SpdMatrix& m : sigma_x_inv_draws) diagonals.emplace_back(m.matrix().diagonal());
  return ewig_update_Lambda(std::span<const Vector>(diagonals));
}

double prior_dof(Eigen::Index p) { return 3.0 * static_cast<double>(p); }

Vector column_variances(const Matrix& x) {
  if (x.rows() < 2) fail(ErrorCode::DegenerateColumn, "column variance needs at least two rows");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  return centered.colwise().squaredNorm().transpose() / static_cast<double>(x.rows() - 1);
}

SigmaXPrior default_sigma_x_prior(const Dataset& data) {
  const Eigen::Index p = data.p();
  const Vector var = column_variances(data.x_a);
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(var[j] > 0.0)) {
      std::ostringstream msg;
      msg << "x_A column " << j << " has zero sample variance";
      fail(ErrorCode::DegenerateColumn, msg.str());
    }
  return SigmaXPrior{prior_dof(p),
                     SpdMatrix::diagonal((2.0 * static_cast<double>(p) - 1.0) * var)};
}

}  // namespace bshrink::model
