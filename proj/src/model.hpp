#pragma once

// Hierarchical regression with a block of missing covariates:
//
//   Y | X = N{beta0 + X^T beta, sigma2}
//   W | X = N_p{psi 1 + nu X, tau2 I}      (or per-gene psi_j, nu_j)
//   X     = N_p{mu_x, Sigma_x}
//
// Subsample A observes (y, x, w); subsample B observes (y, w) only and its
// x rows are imputed. The kernels below are the full conditionals the Gibbs
// engine composes; each comes in a `*_law` form returning the conditional's
// parameters and a `step_*` form drawing from it.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stat_core.hpp"

namespace bshrink::model {

using stat::Rng;
using stat::SpdMatrix;

struct Dataset {
  Vector y_a;
  Matrix x_a;
  Matrix w_a;
  Vector y_b;
  Matrix w_b;

  Eigen::Index p() const noexcept { return x_a.cols(); }
  Eigen::Index n_a() const noexcept { return y_a.size(); }
  Eigen::Index n_b() const noexcept { return y_b.size(); }
  Eigen::Index n() const noexcept { return n_a() + n_b(); }

  // Throws DimensionError / NonFinite.
  void validate() const;
};

enum class MeVariant { Scalar, PerGene };

// Measurement-error parameters. For the scalar variant psi and nu have length
// one; for the per-gene variant they have length p.
struct MeParams {
  MeVariant variant = MeVariant::Scalar;
  Vector psi;
  Vector nu;
  double tau2 = 1.0;

  static MeParams scalar(double psi, double nu, double tau2);
  static MeParams per_gene(Vector psi, Vector nu, double tau2);

  double psi_at(Eigen::Index j) const { return variant == MeVariant::Scalar ? psi[0] : psi[j]; }
  double nu_at(Eigen::Index j) const { return variant == MeVariant::Scalar ? nu[0] : nu[j]; }
};

struct Phi {
  double beta0 = 0.0;
  Vector beta;
  double sigma2 = 1.0;
  MeParams me;
  Vector mu_x;
  SpdMatrix sigma_x_inv;

  void validate() const;
};

enum class LambdaStatus { Fixed, SampledDAplus, EwigEstimated };
enum class LambdaMatrixStatus { FixedDefault, EwigEstimated };

// Shrinkage hyperparameters: lambda scales the ridge prior on beta, Lambda is
// the diagonal inverse scale of the Wishart prior on Sigma_x^{-1}.
struct Hyper {
  double lambda = 1.0;
  LambdaStatus lambda_status = LambdaStatus::Fixed;
  Vector Lambda;
  LambdaMatrixStatus Lambda_status = LambdaMatrixStatus::FixedDefault;
};

// Prior hyperparameters for the components whose default prior is flat or
// Jeffreys. Every default reproduces the improper prior exactly; proper
// values exist so the sampler can be checked by forward simulation.
struct Priors {
  double beta0_precision = 0.0;  // beta0 ~ N(0, 1/precision)
  // Flat-beta methods only: beta ~ N(0, I/precision), independent of sigma2.
  double beta_precision = 0.0;
  double sigma2_shape = 0.0;  // sigma2 ~ IG(shape, rate); (0, 0) is 1/sigma2
  double sigma2_rate = 0.0;
  double tau2_shape = 0.0;
  double tau2_rate = 0.0;
  double me_precision = 0.0;  // (psi, nu) ~ N((psi_mean, nu_mean), I/precision)
  double psi_mean = 0.0;
  double nu_mean = 0.0;
  double mu_x_precision = 0.0;  // mu_x ~ N(0, I/precision)
};

enum class BetaPrior { Flat, Ridge };

struct ImputationLaw {
  Matrix mean;    // n_B x p
  SpdMatrix cov;  // Gamma(phi), shared by all rows
};

struct GaussianLaw {
  Vector mean;
  SpdMatrix precision;
};

// beta | rest = N{gram^{-1} X^T (y - beta0), sigma2 gram^{-1}}.
struct BetaLaw {
  Vector mean;
  SpdMatrix gram;  // X^T X + kappa I
  double sigma2;
  Matrix covariance() const { return sigma2 * gram.inverse(); }
};

struct ScalarNormalLaw {
  double mean;
  double variance;
};

struct InverseGammaLaw {
  double shape;
  double rate;
};

struct WishartLaw {
  double dof;
  SpdMatrix inv_scale;  // the law is W{dof, inv_scale^{-1}}
};

// Counters for numerical guards that fired while sampling.
struct StepDiagnostics {
  long tau2_rate_floored = 0;
};

// Stacked complete-case design: rows of x_A followed by the imputed x_B.
Matrix stacked_x(const Dataset& data, const Matrix& xb);
Vector stacked_y(const Dataset& data);
Matrix stacked_w(const Dataset& data);

double complete_log_likelihood(const Dataset& data, const Matrix& xb, const Phi& phi);

ImputationLaw imputation_law(const Dataset& data, const Phi& phi);
Matrix step_impute_xB(Rng& rng, const Dataset& data, const Phi& phi);

// Throws SingularDesign when p > n_A + n_B or the gram is not invertible.
BetaLaw beta_flat_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                      const Priors& priors = {});
Vector step_beta_flat(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                      const Priors& priors = {});
BetaLaw beta_ridge_law(const Dataset& data, const Matrix& xb, const Phi& phi, double lambda);
Vector step_beta_ridge(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                       double lambda);

ScalarNormalLaw beta0_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                          const Priors& priors = {});
double step_beta0(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                  const Priors& priors = {});

InverseGammaLaw sigma2_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                           BetaPrior beta_prior, double lambda, const Priors& priors = {});
double step_sigma2(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                   BetaPrior beta_prior, double lambda, const Priors& priors = {});

// Joint (psi, nu) regression of w on x for the scalar variant; one
// regression per column for the per-gene variant. Both pooled into a single
// tau2 draw from the residuals of the freshly drawn (psi, nu).
GaussianLaw me_coefficient_law(const Dataset& data, const Matrix& xb, double tau2,
                               MeVariant variant, Eigen::Index column,
                               const Priors& priors = {});
MeParams step_me_params(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                        const Priors& priors = {}, StepDiagnostics* diagnostics = nullptr);

GaussianLaw mu_x_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                     const Priors& priors = {});
Vector step_mu_x(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                 const Priors& priors = {});

// Prior Sigma_x^{-1} ~ W{3p, inv_scale^{-1}}.
WishartLaw sigma_x_inv_law(const Dataset& data, const Matrix& xb, const Phi& phi,
                           const SpdMatrix& inv_scale);
SpdMatrix step_sigma_x_inv(Rng& rng, const Dataset& data, const Matrix& xb, const Phi& phi,
                           const SpdMatrix& inv_scale);

// lambda ~ G{p/2, beta^T beta / (2 sigma2)} under [lambda] ∝ 1/lambda.
double step_lambda_daplus(Rng& rng, const Phi& phi);

// lambda <- p / mean(beta^T beta / sigma2).
double ewig_update_lambda(std::span<const Vector> betas, std::span<const double> sigma2s);
// Lambda_ii <- 3p / mean(diag_i of Sigma_x^{-1}); off-diagonals are zero.
Vector ewig_update_Lambda(std::span<const Vector> sigma_x_inv_diagonals);
Vector ewig_update_Lambda(std::span<const SpdMatrix> sigma_x_inv_draws);

struct SigmaXPrior {
  double dof;
  SpdMatrix inv_scale;
};

// W{3p, ((2p-1) diag(var x_A))^{-1}}: prior mean of Sigma_x is diag(var x_A).
SigmaXPrior default_sigma_x_prior(const Dataset& data);

double prior_dof(Eigen::Index p);

// Column sample variances (n - 1 denominator).
Vector column_variances(const Matrix& x);

}  // namespace bshrink::model
