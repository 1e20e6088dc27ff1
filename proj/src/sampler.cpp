#include "sampler.hpp"

#include <chrono>
#include <sstream>

namespace bshrink::sampler {

MethodTraits traits(Method method) {
  using model::BetaPrior;
  switch (method) {
    case Method::Vanilla:
      return {BetaPrior::Flat, false, false, false, false, Variant::DA, true};
    case Method::HierBetas:
      return {BetaPrior::Ridge, false, true, false, false, Variant::DAplus, false};
    case Method::EbBetas:
      return {BetaPrior::Ridge, false, false, true, false, Variant::EWiG, false};
    case Method::EbSigmaX:
      return {BetaPrior::Flat, true, false, false, true, Variant::EWiG, true};
    case Method::EbBoth:
      return {BetaPrior::Ridge, true, false, true, true, Variant::EWiG, false};
  }
  fail(ErrorCode::InvalidParameter, "unknown method");
}

const char* to_string(Method method) {
  switch (method) {
    case Method::Vanilla: return "vanilla";
    case Method::HierBetas: return "hierbetas";
    case Method::EbBetas: return "ebbetas";
    case Method::EbSigmaX: return "ebsigmax";
    case Method::EbBoth: return "ebboth";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods())
    if (name == to_string(m)) return m;
  fail(ErrorCode::ConfigError, "unknown method '" + name + "'");
}

std::vector<Method> all_methods() {
  return {Method::Vanilla, Method::HierBetas, Method::EbBetas, Method::EbSigmaX, Method::EbBoth};
}

void ChainConfig::validate(Method method) const {
  if (burn_in < 0) fail(ErrorCode::ConfigError, "burn_in must be >= 0");
  if (stored_draws < 1) fail(ErrorCode::ConfigError, "stored_draws must be >= 1");
  if (ewig_block < 1) fail(ErrorCode::ConfigError, "K must be >= 1");
  if (traits(method).variant == Variant::EWiG && !freeze_hyper && burn_in % ewig_block != 0) {
    std::ostringstream msg;
    msg << "burn_in (" << burn_in << ") must be a multiple of K (" << ewig_block << ") for "
        << to_string(method);
    fail(ErrorCode::ConfigError, msg.str());
  }
}

Phi initial_phi(const Dataset& data, model::MeVariant me_variant) {
  const Eigen::Index p = data.p();
  const Vector y = model::stacked_y(data);
  const double ybar = y.mean();
  double var_y = y.size() > 1 ? (y.array() - ybar).square().sum() / double(y.size() - 1) : 1.0;
  if (!(var_y > 0.0)) var_y = 1.0;

  double tau2 = 1.0;
  if (data.x_a.size() > 1) {
    const Eigen::ArrayXXd d = (data.w_a - data.x_a).array();
    const double v = (d - d.mean()).square().sum() / double(d.size() - 1);
    if (v > 0.0 && std::isfinite(v)) tau2 = v;
  }

  const Vector var_x = model::column_variances(data.x_a);
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(var_x[j] > 0.0))
      fail(ErrorCode::DegenerateColumn, "initial state: x_A has a constant column");

  model::MeParams me = me_variant == model::MeVariant::Scalar
                           ? model::MeParams::scalar(0.0, 1.0, tau2)
                           : model::MeParams::per_gene(Vector::Zero(p), Vector::Ones(p), tau2);
  return Phi{ybar,
             Vector::Zero(p),
             var_y,
             std::move(me),
             data.x_a.colwise().mean().transpose(),
             SpdMatrix::diagonal(var_x.cwiseInverse())};
}

GibbsState::GibbsState(Method method, const ChainConfig& config, Phi phi, Hyper hyper,
                       SpdMatrix default_inv_scale)
    : method_(method),
      traits_(traits(method)),
      config_(config),
      phi_(std::move(phi)),
      hyper_(std::move(hyper)),
      default_inv_scale_(std::move(default_inv_scale)) {}

void GibbsState::sweep(Rng& rng, const Dataset& data, long iteration, const SweepHooks& hooks) {
  lambda_updated_ = false;
  Lambda_updated_ = false;
  const model::Priors& priors = config_.priors;
  const bool ridge = traits_.beta_prior == model::BetaPrior::Ridge;

  xb_ = model::step_impute_xB(rng, data, phi_);

  if (hooks.beta)
    phi_.beta = hooks.beta(rng, data, xb_, phi_, hyper_);
  else if (ridge)
    phi_.beta = model::step_beta_ridge(rng, data, xb_, phi_, hyper_.lambda);
  else
    phi_.beta = model::step_beta_flat(rng, data, xb_, phi_, priors);

  phi_.beta0 = model::step_beta0(rng, data, xb_, phi_, priors);

  if (hooks.sigma2)
    phi_.sigma2 = hooks.sigma2(rng, data, xb_, phi_, hyper_);
  else
    phi_.sigma2 =
        model::step_sigma2(rng, data, xb_, phi_, traits_.beta_prior, hyper_.lambda, priors);

  phi_.me = model::step_me_params(rng, data, xb_, phi_, priors, &diagnostics_);
  phi_.mu_x = model::step_mu_x(rng, data, xb_, phi_, priors);

  if (traits_.adaptive_sigma_x)
    phi_.sigma_x_inv =
        model::step_sigma_x_inv(rng, data, xb_, phi_, SpdMatrix::diagonal(hyper_.Lambda));
  else
    phi_.sigma_x_inv = model::step_sigma_x_inv(rng, data, xb_, phi_, default_inv_scale_);

  if (config_.freeze_hyper) return;

  if (traits_.sample_lambda) {
    hyper_.lambda = model::step_lambda_daplus(rng, phi_);
    lambda_updated_ = true;
  }
  if (traits_.variant != Variant::EWiG) return;

  if (traits_.ewig_lambda) {
    window_beta_.push_back(phi_.beta);
    window_sigma2_.push_back(phi_.sigma2);
  }
  if (traits_.ewig_Lambda) window_diag_.push_back(phi_.sigma_x_inv.matrix().diagonal());

  if (iteration % config_.ewig_block != 0) return;
  if (traits_.ewig_lambda) {
    hyper_.lambda = model::ewig_update_lambda(window_beta_, window_sigma2_);
    hyper_.lambda_status = model::LambdaStatus::EwigEstimated;
    lambda_updated_ = true;
    window_beta_.clear();
    window_sigma2_.clear();
  }
  if (traits_.ewig_Lambda) {
    hyper_.Lambda = model::ewig_update_Lambda(std::span<const Vector>(window_diag_));
    hyper_.Lambda_status = model::LambdaMatrixStatus::EwigEstimated;
    Lambda_updated_ = true;
    window_diag_.clear();
  }
}

ChainOutput run_chain(const Dataset& data, Method method, const ChainConfig& config,
                      const SweepHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  data.validate();
  config.validate(method);
  const MethodTraits tr = traits(method);
  const Eigen::Index p = data.p();
  if (tr.needs_full_rank && p > data.n()) {
    std::ostringstream msg;
    msg << to_string(method) << " requires p <= n_A + n_B (p = " << p << ", n = " << data.n()
        << ")";
    fail(ErrorCode::DimensionError, msg.str());
  }

  SpdMatrix inv_scale = config.sigma_x_inv_scale
                            ? *config.sigma_x_inv_scale
                            : model::default_sigma_x_prior(data).inv_scale;
  Phi phi = config.init.phi ? *config.init.phi : initial_phi(data, config.me_variant);
  phi.validate();

  Hyper hyper;
  hyper.lambda = config.init.lambda.value_or(1.0);
  hyper.lambda_status = tr.sample_lambda   ? model::LambdaStatus::SampledDAplus
                        : tr.ewig_lambda   ? model::LambdaStatus::EwigEstimated
                                           : model::LambdaStatus::Fixed;
  if (config.freeze_hyper) hyper.lambda_status = model::LambdaStatus::Fixed;
  if (config.init.Lambda) {
    hyper.Lambda = *config.init.Lambda;
  } else {
    // Fixed point of the Lambda update at the initial Sigma_x^{-1}.
    const Vector d = phi.sigma_x_inv.matrix().diagonal();
    hyper.Lambda = model::ewig_update_Lambda(std::span<const Vector>(&d, 1));
  }
  hyper.Lambda_status = tr.ewig_Lambda && !config.freeze_hyper
                            ? model::LambdaMatrixStatus::EwigEstimated
                            : model::LambdaMatrixStatus::FixedDefault;
  if (hyper.Lambda.size() != p || !(hyper.Lambda.minCoeff() > 0.0))
    fail(ErrorCode::InvalidParameter, "initial Lambda must be a positive p-vector");

  ChainOutput out;
  out.method = method;
  out.seed = config.seed;
  out.stream = config.stream;
  out.draws.reserve(static_cast<size_t>(config.stored_draws));
  out.xb_mean = Matrix::Zero(data.n_b(), p);

  GibbsState state(method, config, std::move(phi), std::move(hyper), std::move(inv_scale));
  Rng rng(config.seed, config.stream);
  const long total = config.burn_in + config.stored_draws;
  for (long it = 1; it <= total; ++it) {
    try {
      state.sweep(rng, data, it, hooks);
    } catch (const ChainError&) {
      throw;
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << to_string(method) << " chain failed at iteration " << it << ": " << e.what();
      throw ChainError(e.code(), it, msg.str());
    }
    if (state.lambda_updated()) out.lambda_trace.push_back(state.hyper().lambda);
    if (state.Lambda_updated()) out.Lambda_trace.push_back(state.hyper().Lambda);
    if (it > config.burn_in) {
      out.draws.push_back(state.phi());
      out.xb_mean += state.xb();
    }
  }
  out.xb_mean /= static_cast<double>(config.stored_draws);
  out.iterations = total;
  out.final_hyper = state.hyper();
  out.diagnostics = state.diagnostics();
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace bshrink::sampler
