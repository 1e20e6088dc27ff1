#include "geweke.hpp"

#include <algorithm>
#include <cmath>

namespace bshrink::sampler {

namespace {

struct Simulator {
  Method method;
  GewekeDims dims;
  model::Priors priors;
  double lambda;
  SpdMatrix inv_scale;

  Phi draw_prior(Rng& rng) const {
    const Eigen::Index p = dims.p;
    const double beta0 = rng.normal() / std::sqrt(priors.beta0_precision);
    const double sigma2 = stat::sample_inverse_gamma(rng, priors.sigma2_shape, priors.sigma2_rate);
    Vector beta = stat::standard_normal_vector(rng, p);
    if (traits(method).beta_prior == model::BetaPrior::Ridge)
      beta *= std::sqrt(sigma2 / lambda);
    else
      beta /= std::sqrt(priors.beta_precision);
    const double me_sd = 1.0 / std::sqrt(priors.me_precision);
    const double psi = priors.psi_mean + me_sd * rng.normal();
    const double nu = priors.nu_mean + me_sd * rng.normal();
    const double tau2 = stat::sample_inverse_gamma(rng, priors.tau2_shape, priors.tau2_rate);
    Vector mu = stat::standard_normal_vector(rng, p) / std::sqrt(priors.mu_x_precision);
    SpdMatrix prec = stat::sample_wishart_inverse_scale(rng, model::prior_dof(p), inv_scale);
    return Phi{beta0, std::move(beta), sigma2, model::MeParams::scalar(psi, nu, tau2),
               std::move(mu), std::move(prec)};
  }

  Matrix draw_x(Rng& rng, const Phi& phi, Eigen::Index rows) const {
    Matrix x(rows, dims.p);
    for (Eigen::Index i = 0; i < rows; ++i)
      x.row(i) = stat::sample_mvnormal_precision(rng, phi.mu_x, phi.sigma_x_inv).transpose();
    return x;
  }

  void draw_outcomes(Rng& rng, const Phi& phi, const Matrix& x, Vector& y, Matrix& w) const {
    const double sigma = std::sqrt(phi.sigma2);
    const double tau = std::sqrt(phi.me.tau2);
    y.resize(x.rows());
    w.resize(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      y[i] = phi.beta0 + x.row(i).dot(phi.beta) + sigma * rng.normal();
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        w(i, j) = phi.me.psi_at(j) + phi.me.nu_at(j) * x(i, j) + tau * rng.normal();
    }
  }

  // Fresh subsample A plus B outcomes for the given latent x_B.
  Dataset draw_data(Rng& rng, const Phi& phi, const Matrix& xb) const {
    Dataset d;
    d.x_a = draw_x(rng, phi, dims.n_a);
    draw_outcomes(rng, phi, d.x_a, d.y_a, d.w_a);
    draw_outcomes(rng, phi, xb, d.y_b, d.w_b);
    return d;
  }
};

std::vector<std::string> stat_names(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) names.push_back("beta[" + std::to_string(j) + "]");
  names.insert(names.end(), {"beta0", "sigma2", "psi", "nu", "tau2"});
  for (Eigen::Index j = 0; j < p; ++j) names.push_back("mu_x[" + std::to_string(j) + "]");
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = j; k < p; ++k)
      names.push_back("sigma_x_inv[" + std::to_string(j) + "," + std::to_string(k) + "]");
  const size_t first = names.size();
  for (size_t i = 0; i < first; ++i) names.push_back(names[i] + "^2");
  return names;
}

std::vector<double> test_functions(const Phi& phi) {
  const Eigen::Index p = phi.beta.size();
  std::vector<double> g;
  for (Eigen::Index j = 0; j < p; ++j) g.push_back(phi.beta[j]);
  g.insert(g.end(), {phi.beta0, phi.sigma2, phi.me.psi[0], phi.me.nu[0], phi.me.tau2});
  for (Eigen::Index j = 0; j < p; ++j) g.push_back(phi.mu_x[j]);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = j; k < p; ++k) g.push_back(phi.sigma_x_inv.matrix()(j, k));
  const size_t first = g.size();
  for (size_t i = 0; i < first; ++i) g.push_back(g[i] * g[i]);
  return g;
}

}  // namespace

double GewekeReport::max_abs_z() const {
  double m = 0.0;
  for (const GewekeStat& s : stats) m = std::max(m, std::abs(s.z));
  return m;
}

model::Priors geweke_priors() {
  model::Priors pr;
  pr.beta0_precision = 1.0;
  pr.beta_precision = 1.0;
  pr.sigma2_shape = 6.0;
  pr.sigma2_rate = 5.0;
  pr.tau2_shape = 6.0;
  pr.tau2_rate = 5.0;
  pr.me_precision = 1.0;
  pr.psi_mean = 0.0;
  pr.nu_mean = 1.0;
  pr.mu_x_precision = 1.0;
  return pr;
}

GewekeReport geweke_joint_check(Method method, const GewekeDims& dims, long iterations,
                                const GewekeOptions& options) {
  GewekeReport report;
  report.method = method;
  report.dims = dims;
  report.iterations = iterations;
  if (iterations <= 0) return report;
  if (dims.p < 1 || dims.n_a < 1 || dims.n_b < 0)
    fail(ErrorCode::InvalidParameter, "geweke: invalid dimensions");

  const Eigen::Index p = dims.p;
  const SpdMatrix inv_scale = SpdMatrix::diagonal(Vector::Constant(p, 2.0 * double(p) - 1.0));
  const Simulator sim{method, dims, geweke_priors(), options.fixed_lambda, inv_scale};

  const std::vector<std::string> names = stat_names(p);
  const size_t m = names.size();

  // Marginal-conditional: only phi enters the test functions, so the data
  // draw is skipped.
  Rng forward_rng = Rng(options.seed).derive(1);
  std::vector<double> f_sum(m, 0.0), f_sq(m, 0.0);
  for (long s = 0; s < iterations; ++s) {
    const std::vector<double> g = test_functions(sim.draw_prior(forward_rng));
    for (size_t i = 0; i < m; ++i) {
      f_sum[i] += g[i];
      f_sq[i] += g[i] * g[i];
    }
  }

  ChainConfig config;
  config.freeze_hyper = true;
  config.priors = sim.priors;
  Hyper hyper;
  hyper.lambda = options.fixed_lambda;
  hyper.Lambda = inv_scale.matrix().diagonal();

  SweepHooks hooks;
  if (options.mutate_sigma2_shape) {
    const model::BetaPrior bp = traits(method).beta_prior;
    const model::Priors pr = sim.priors;
    hooks.sigma2 = [bp, pr](Rng& rng, const Dataset& d, const Matrix& xb, const Phi& phi,
                            const Hyper& h) {
      const model::InverseGammaLaw law = model::sigma2_law(d, xb, phi, bp, h.lambda, pr);
      return stat::sample_inverse_gamma(rng, law.shape + 1.0, law.rate);
    };
  }

  Rng gibbs_rng = Rng(options.seed).derive(2);
  Phi phi0 = sim.draw_prior(gibbs_rng);
  Matrix xb = sim.draw_x(gibbs_rng, phi0, dims.n_b);
  Dataset data = sim.draw_data(gibbs_rng, phi0, xb);
  GibbsState state(method, config, std::move(phi0), hyper, inv_scale);

  const long batches = std::clamp(options.batches, 1L, iterations);
  const long batch_size = iterations / batches;
  std::vector<std::vector<double>> batch_sum(m, std::vector<double>(batches, 0.0));
  std::vector<double> g_sum(m, 0.0);
  for (long s = 0; s < iterations; ++s) {
    state.sweep(gibbs_rng, data, s + 1, hooks);
    data = sim.draw_data(gibbs_rng, state.phi(), state.xb());
    const std::vector<double> g = test_functions(state.phi());
    const long b = std::min(s / batch_size, batches - 1);
    for (size_t i = 0; i < m; ++i) {
      g_sum[i] += g[i];
      batch_sum[i][b] += g[i];
    }
  }

  const double n = static_cast<double>(iterations);
  for (size_t i = 0; i < m; ++i) {
    GewekeStat st;
    st.name = names[i];
    st.forward_mean = f_sum[i] / n;
    const double f_var = std::max(0.0, f_sq[i] / n - st.forward_mean * st.forward_mean);
    st.forward_se = std::sqrt(f_var / n);
    st.gibbs_mean = g_sum[i] / n;
    // Batch means; the last batch absorbs the remainder.
    double bm_mean = 0.0;
    std::vector<double> means(batches);
    for (long b = 0; b < batches; ++b) {
      const long count = b == batches - 1 ? iterations - b * batch_size : batch_size;
      means[b] = batch_sum[i][b] / double(count);
      bm_mean += means[b];
    }
    bm_mean /= double(batches);
    double bm_var = 0.0;
    for (double v : means) bm_var += (v - bm_mean) * (v - bm_mean);
    bm_var = batches > 1 ? bm_var / double(batches - 1) : 0.0;
    st.gibbs_se = std::sqrt(bm_var / double(batches));
    const double se = std::hypot(st.forward_se, st.gibbs_se);
    st.z = se > 0.0 ? (st.forward_mean - st.gibbs_mean) / se : 0.0;
    report.stats.push_back(std::move(st));
  }
  return report;
}

}  // namespace bshrink::sampler
