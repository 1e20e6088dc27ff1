#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace bshrink::sampler {

using model::Dataset;
using model::Hyper;
using model::Phi;
using stat::Rng;
using stat::SpdMatrix;

//            beta prior   Sigma_x^{-1} inverse scale   eta          variant
// VANILLA    flat         (2p-1) diag(var x_A)          {}           DA
// HIERBETAS  ridge        (2p-1) diag(var x_A)          {lambda}     DA+
// EBBETAS    ridge        (2p-1) diag(var x_A)          {lambda}     EWiG
// EBSIGMAX   flat         Lambda                        {Lambda}     EWiG
// EBBOTH     ridge        Lambda                        {lambda, Lambda}  EWiG
enum class Method { Vanilla, HierBetas, EbBetas, EbSigmaX, EbBoth };

enum class Variant { DA, DAplus, EWiG };

struct MethodTraits {
  model::BetaPrior beta_prior;
  bool adaptive_sigma_x;  // Wishart inverse scale is Lambda
  bool sample_lambda;     // DA+
  bool ewig_lambda;
  bool ewig_Lambda;
  Variant variant;
  bool needs_full_rank;  // p <= n_A + n_B
};

MethodTraits traits(Method method);
const char* to_string(Method method);
// Accepts the lower-case method names; throws ConfigError otherwise.
Method parse_method(const std::string& name);
std::vector<Method> all_methods();

struct InitPolicy {
  std::optional<double> lambda;
  std::optional<Vector> Lambda;
  std::optional<Phi> phi;
};

struct ChainConfig {
  long burn_in = 2500;
  long stored_draws = 1000;
  long ewig_block = 100;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  model::MeVariant me_variant = model::MeVariant::Scalar;
  InitPolicy init;
  // Hold eta at its initial value; turns every method into DA.
  bool freeze_hyper = false;
  model::Priors priors;
  // Replaces the default (2p-1) diag(var x_A) inverse scale for the
  // non-adaptive methods; required when x_A has a constant column.
  std::optional<SpdMatrix> sigma_x_inv_scale;

  void validate(Method method) const;
};

// Optional replacements for individual kernels. Used by tests that freeze
// draws and by the Geweke harness's mutation check.
struct SweepHooks {
  std::function<Vector(Rng&, const Dataset&, const Matrix& xb, const Phi&, const Hyper&)> beta;
  std::function<double(Rng&, const Dataset&, const Matrix& xb, const Phi&, const Hyper&)> sigma2;
};

struct ChainOutput {
  Method method;
  std::vector<Phi> draws;
  Hyper final_hyper;
  // lambda after every update (DA+: every sweep, EWiG: every K-th sweep),
  // burn-in included.
  std::vector<double> lambda_trace;
  std::vector<Vector> Lambda_trace;
  Matrix xb_mean;  // posterior mean of the imputed x_B over stored draws
  long iterations = 0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  model::StepDiagnostics diagnostics;
};

// Single Gibbs chain. Per sweep: impute x_B; beta; beta0; sigma2; ME
// parameters; mu_x; Sigma_x^{-1}; then eta (lambda draw for DA+, lambda
// and/or Lambda M-step from the previous K draws on every K-th sweep for
// EWiG). Throws DimensionError before sampling when the method needs
// p <= n_A + n_B, and ChainError for any kernel failure.
ChainOutput run_chain(const Dataset& data, Method method, const ChainConfig& config,
                      const SweepHooks& hooks = {});

// Moment-matched starting point.
Phi initial_phi(const Dataset& data, model::MeVariant me_variant);

// Mutable chain state advanced one sweep at a time; run_chain drives it and
// the Geweke harness reuses it with data re-drawn between sweeps.
class GibbsState {
 public:
  GibbsState(Method method, const ChainConfig& config, Phi phi, Hyper hyper,
             SpdMatrix default_inv_scale);

  // One sweep over the conditionals. EWiG updates happen when
  // `iteration` (1-based) is a multiple of K.
  void sweep(Rng& rng, const Dataset& data, long iteration, const SweepHooks& hooks = {});

  const Phi& phi() const noexcept { return phi_; }
  const Hyper& hyper() const noexcept { return hyper_; }
  const Matrix& xb() const noexcept { return xb_; }
  const model::StepDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  bool lambda_updated() const noexcept { return lambda_updated_; }
  bool Lambda_updated() const noexcept { return Lambda_updated_; }

  void set_phi(Phi phi) { phi_ = std::move(phi); }
  void set_xb(Matrix xb) { xb_ = std::move(xb); }
  void set_default_inv_scale(SpdMatrix s) { default_inv_scale_ = std::move(s); }

 private:
  Method method_;
  MethodTraits traits_;
  ChainConfig config_;
  Phi phi_;
  Hyper hyper_;
  SpdMatrix default_inv_scale_;
  Matrix xb_;
  std::vector<Vector> window_beta_;
  std::vector<double> window_sigma2_;
  std::vector<Vector> window_diag_;
  model::StepDiagnostics diagnostics_;
  bool lambda_updated_ = false;
  bool Lambda_updated_ = false;
};

}  // namespace bshrink::sampler
