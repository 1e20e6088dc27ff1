#include "simlab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "ridge_baseline.hpp"

namespace bshrink::simlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stable per-estimator stream keys, independent of the order methods are listed.
std::uint64_t estimator_key(const Estimator& e) {
  switch (e.kind) {
    case Estimator::Kind::Bayes: return static_cast<std::uint64_t>(e.method);
    case Estimator::Kind::Ridge: return 16;
    case Estimator::Kind::Truth: return 17;
  }
  return 0;
}

struct Generator {
  const SimConfig& config;
  double tau;
  Vector beta;
  double sigma;
  stat::LowerTriangular chol;

  Vector draw_x(Rng& rng) const {
    const Eigen::Index p = config.p;
    Vector x = chol.l.triangularView<Eigen::Lower>() * stat::standard_normal_vector(rng, p);
    if (config.violation == Violation::MixtureX) {
      const std::uint64_t z = rng.below(3);
      if (z == 1) x.array() += 3.0;
      if (z == 2) x.array() -= 3.0;
    }
    return x;
  }

  double draw_y(Rng& rng, const Vector& x) const {
    const double eps = config.violation == Violation::SkewedError
                           ? stat::sample_gamma(rng, 1.0, 1.0) - 1.0
                           : rng.normal();
    return config.beta0 + x.dot(beta) + sigma * eps;
  }

  Vector draw_w(Rng& rng, const Vector& x) const {
    Vector w(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double signal = config.violation == Violation::QuadraticMe ? x[j] * x[j] : x[j];
      w[j] = config.psi + config.nu * signal + tau * rng.normal();
    }
    return w;
  }
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct Evaluation {
  double mspe_ppm = kNaN;
  double mspe_pm = kNaN;
  double coverage = kNaN;
  double width = kNaN;
  double lambda = kNaN;
};

void evaluate_intervals(Rng& rng, const SimConfig& config, const sampler::ChainOutput& chain,
                        const SimulatedData& sim, Evaluation& ev) {
  const Eigen::Index m = sim.x_validation.rows();
  std::vector<inference::Interval> intervals;
  intervals.reserve(static_cast<size_t>(m));
  std::vector<double> y(static_cast<size_t>(m));
  double width = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector x = sim.x_validation.row(j).transpose();
    const std::vector<double> draws = inference::predictive_draws(rng, chain, x, config.noise);
    intervals.push_back(inference::prediction_interval(draws, config.p_lo, config.p_hi));
    width += intervals.back().width();
    y[static_cast<size_t>(j)] = sim.y_validation[j];
  }
  ev.coverage = inference::coverage(intervals, y);
  ev.width = width / static_cast<double>(m);
}

Evaluation evaluate(const Estimator& est, const SimConfig& config, const SimulatedData& sim,
                    Rng& rep, std::uint64_t& stream_out) {
  Evaluation ev;
  const std::uint64_t key = estimator_key(est);
  Rng predictive = rep.derive(1000 + key);
  switch (est.kind) {
    case Estimator::Kind::Ridge: {
      stream_out = 0;
      const ridge::RidgeFit fit = ridge::gcv_select(sim.data.y_a, sim.data.x_a,
                                                    ridge::default_grid(sim.data.x_a));
      ev.mspe_ppm = inference::mspe(fit.beta0_hat, fit.beta_hat, sim.y_validation,
                                    sim.x_validation);
      ev.mspe_pm = ev.mspe_ppm;
      ev.lambda = fit.lambda_star;
      return ev;
    }
    case Estimator::Kind::Truth: {
      stream_out = predictive.stream();
      sampler::ChainOutput chain;
      chain.method = sampler::Method::Vanilla;
      chain.draws.assign(static_cast<size_t>(config.chain.stored_draws), sim.truth);
      ev.mspe_ppm = inference::mspe(sim.truth.beta0, sim.truth.beta, sim.y_validation,
                                    sim.x_validation);
      ev.mspe_pm = ev.mspe_ppm;
      evaluate_intervals(predictive, config, chain, sim, ev);
      return ev;
    }
    case Estimator::Kind::Bayes: {
      sampler::ChainConfig cc = config.chain;
      cc.seed = config.seed;
      cc.stream = rep.derive(10 + key).stream();
      stream_out = cc.stream;
      const sampler::ChainOutput chain = sampler::run_chain(sim.data, est.method, cc);
      const inference::PosteriorSummary s =
          inference::summarize(chain, config.p_lo, config.p_hi);
      ev.mspe_ppm = inference::mspe(s.beta0_hat, s.beta_ppm, sim.y_validation, sim.x_validation);
      ev.mspe_pm = inference::mspe(s.beta0_hat, s.beta_pm, sim.y_validation, sim.x_validation);
      if (sampler::traits(est.method).beta_prior == model::BetaPrior::Ridge)
        ev.lambda = chain.final_hyper.lambda;
      evaluate_intervals(predictive, config, chain, sim, ev);
      return ev;
    }
  }
  return ev;
}

}  // namespace

const char* to_string(BetaPattern pattern) {
  switch (pattern) {
    case BetaPattern::Diffuse: return "diffuse";
    case BetaPattern::Concentrated: return "concentrated";
    case BetaPattern::ConcentratedLike: return "concentrated_like";
    case BetaPattern::Custom: return "custom";
  }
  return "unknown";
}

const char* to_string(Violation violation) {
  switch (violation) {
    case Violation::None: return "none";
    case Violation::SkewedError: return "skewed_error";
    case Violation::QuadraticMe: return "quadratic_me";
    case Violation::MixtureX: return "mixture_x";
  }
  return "unknown";
}

BetaPattern parse_beta_pattern(const std::string& name) {
  for (BetaPattern b : {BetaPattern::Diffuse, BetaPattern::Concentrated,
                        BetaPattern::ConcentratedLike, BetaPattern::Custom})
    if (name == to_string(b)) return b;
  fail(ErrorCode::ConfigError, "unknown beta pattern '" + name + "'");
}

Violation parse_violation(const std::string& name) {
  for (Violation v :
       {Violation::None, Violation::SkewedError, Violation::QuadraticMe, Violation::MixtureX})
    if (name == to_string(v)) return v;
  fail(ErrorCode::ConfigError, "unknown violation '" + name + "'");
}

std::string Estimator::name() const {
  switch (kind) {
    case Kind::Bayes: return sampler::to_string(method);
    case Kind::Ridge: return "ridg";
    case Kind::Truth: return "truth";
  }
  return "unknown";
}

Estimator Estimator::parse(const std::string& name) {
  if (name == "ridg") return {Kind::Ridge};
  if (name == "truth") return {Kind::Truth};
  return {Kind::Bayes, sampler::parse_method(name)};
}

void SimConfig::validate() const {
  if (n_a < 2 || n_b < 0 || p < 1) fail(ErrorCode::ConfigError, "need n_A >= 2, n_B >= 0, p >= 1");
  if (!(r2 > 0.0 && r2 < 1.0)) fail(ErrorCode::ConfigError, "r2 must lie in (0, 1)");
  if (taus.empty()) fail(ErrorCode::ConfigError, "at least one tau is required");
  for (double t : taus)
    if (!(t > 0.0)) fail(ErrorCode::ConfigError, "tau must be positive");
  if (replicates < 1) fail(ErrorCode::ConfigError, "replicates must be >= 1");
  if (validation_n < 1) fail(ErrorCode::ConfigError, "validation_n must be >= 1");
  if (methods.empty()) fail(ErrorCode::ConfigError, "no methods requested");
  if (!(0.0 < p_lo && p_lo < p_hi && p_hi < 1.0))
    fail(ErrorCode::ConfigError, "levels must satisfy 0 < p_lo < p_hi < 1");
  if (!(rho > -1.0 / static_cast<double>(std::max<Eigen::Index>(p - 1, 1)) && rho < 1.0))
    fail(ErrorCode::ConfigError, "rho does not give a positive-definite Sigma_x");
  beta_truth(beta_pattern, p, beta_custom);
  for (const Estimator& e : methods)
    if (e.kind == Estimator::Kind::Bayes) chain.validate(e.method);
}

SimConfig paper_profile() {
  SimConfig c;
  c.chain.burn_in = 2500;
  c.chain.stored_draws = 1000;
  c.chain.ewig_block = 100;
  c.methods = {Estimator::parse("ridg"),     Estimator::parse("vanilla"),
               Estimator::parse("hierbetas"), Estimator::parse("ebbetas"),
               Estimator::parse("ebsigmax"),  Estimator::parse("ebboth"),
               Estimator::parse("truth")};
  return c;
}

SimConfig desk_profile() {
  SimConfig c = paper_profile();
  c.p = 20;
  c.n_a = 25;
  c.n_b = 100;
  c.beta_pattern = BetaPattern::ConcentratedLike;
  c.replicates = 20;
  c.validation_n = 500;
  c.chain.burn_in = 500;
  c.chain.stored_draws = 300;
  return c;
}

Vector beta_truth(BetaPattern pattern, Eigen::Index p, const Vector& custom) {
  auto require_99 = [p](const char* name) {
    if (p != 99) {
      std::ostringstream msg;
      msg << name << " beta pattern requires p = 99, got " << p;
      fail(ErrorCode::PatternDimensionMismatch, msg.str());
    }
  };
  Vector beta(p);
  switch (pattern) {
    case BetaPattern::Diffuse:
      require_99("diffuse");
      for (Eigen::Index i = 0; i < p; ++i) beta[i] = static_cast<double>(i - 49) / 100.0;
      return beta;
    case BetaPattern::Concentrated:
      require_99("concentrated");
      [[fallthrough]];
    case BetaPattern::ConcentratedLike:
      for (Eigen::Index i = 0; i < p; ++i) beta[i] = i % 9 == 8 ? 1.0 : 0.1;
      return beta;
    case BetaPattern::Custom:
      if (custom.size() != p) {
        std::ostringstream msg;
        msg << "custom beta has length " << custom.size() << ", expected " << p;
        fail(ErrorCode::PatternDimensionMismatch, msg.str());
      }
      return custom;
  }
  return beta;
}

Matrix equicorrelation(Eigen::Index p, double rho) {
  Matrix s = Matrix::Constant(p, p, rho);
  s.diagonal().setOnes();
  return s;
}

double sigma2_from_r2(const Vector& beta, const Matrix& sigma_x, double r2) {
  if (!(r2 > 0.0 && r2 < 1.0)) fail(ErrorCode::InvalidParameter, "r2 must lie in (0, 1)");
  const double signal = beta.dot(sigma_x * beta);
  return signal * (1.0 - r2) / r2;
}

SimulatedData generate_dataset(Rng& rng, const SimConfig& config, double tau) {
  const Eigen::Index p = config.p;
  const Matrix sigma_x = equicorrelation(p, config.rho);
  Generator gen{config, tau, beta_truth(config.beta_pattern, p, config.beta_custom), 0.0,
                stat::cholesky(sigma_x)};
  const double sigma2 = sigma2_from_r2(gen.beta, sigma_x, config.r2);
  gen.sigma = std::sqrt(sigma2);

  Dataset d;
  d.y_a.resize(config.n_a);
  d.x_a.resize(config.n_a, p);
  d.w_a.resize(config.n_a, p);
  d.y_b.resize(config.n_b);
  d.w_b.resize(config.n_b, p);
  for (Eigen::Index i = 0; i < config.n_a; ++i) {
    const Vector x = gen.draw_x(rng);
    d.x_a.row(i) = x.transpose();
    d.y_a[i] = gen.draw_y(rng, x);
    d.w_a.row(i) = gen.draw_w(rng, x).transpose();
  }
  for (Eigen::Index i = 0; i < config.n_b; ++i) {
    const Vector x = gen.draw_x(rng);
    d.y_b[i] = gen.draw_y(rng, x);
    d.w_b.row(i) = gen.draw_w(rng, x).transpose();
  }
  Matrix x_val(config.validation_n, p);
  Vector y_val(config.validation_n);
  for (Eigen::Index i = 0; i < config.validation_n; ++i) {
    const Vector x = gen.draw_x(rng);
    x_val.row(i) = x.transpose();
    y_val[i] = gen.draw_y(rng, x);
  }

  Phi truth{config.beta0,
            gen.beta,
            sigma2,
            model::MeParams::scalar(config.psi, config.nu, tau * tau),
            Vector::Zero(p),
            stat::SpdMatrix::symmetrized(stat::SpdMatrix(sigma_x).inverse())};
  return SimulatedData{std::move(d), std::move(truth), std::move(y_val), std::move(x_val)};
}

Rng replicate_rng(std::uint64_t seed, size_t tau_index, long replicate) {
  return Rng(seed).derive(tau_index).derive(static_cast<std::uint64_t>(replicate));
}

std::vector<ReplicateRecord> run_replicate(const SimConfig& config, size_t tau_index,
                                           long replicate) {
  const double tau = config.taus.at(tau_index);
  Rng rep = replicate_rng(config.seed, tau_index, replicate);
  Rng data_rng = rep.derive(0);
  const SimulatedData sim = generate_dataset(data_rng, config, tau);

  std::vector<ReplicateRecord> records;
  for (const Estimator& est : config.methods) {
    ReplicateRecord r{tau, replicate, est.name(), config.seed, 0, true, "", sim.truth.sigma2,
                      kNaN, kNaN, kNaN, kNaN, kNaN, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      const Evaluation ev = evaluate(est, config, sim, rep, r.stream);
      r.mspe_ppm = ev.mspe_ppm;
      r.mspe_pm = ev.mspe_pm;
      r.coverage = ev.coverage;
      r.width = ev.width;
      r.lambda = ev.lambda;
    } catch (const Error& e) {
      r.ok = false;
      r.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    records.push_back(std::move(r));
  }
  return records;
}

const Aggregate& ExperimentResult::aggregate(double tau, const std::string& method) const {
  for (const Aggregate& a : aggregates)
    if (a.tau == tau && a.method == method) return a;
  fail(ErrorCode::InvalidParameter, "no aggregate for method '" + method + "'");
}

std::vector<const ReplicateRecord*> ExperimentResult::records_for(
    double tau, const std::string& method) const {
  std::vector<const ReplicateRecord*> out;
  for (const ReplicateRecord& r : records)
    if (r.tau == tau && r.method == method) out.push_back(&r);
  return out;
}

std::vector<Aggregate> aggregate(const SimConfig& config,
                                 const std::vector<ReplicateRecord>& records) {
  std::vector<Aggregate> out;
  for (double tau : config.taus) {
    for (const Estimator& est : config.methods) {
      const std::string name = est.name();
      std::vector<double> mspe, mspe_pm, cov, width;
      long excluded = 0;
      for (const ReplicateRecord& r : records) {
        if (r.tau != tau || r.method != name) continue;
        if (!r.ok) {
          ++excluded;
          continue;
        }
        mspe.push_back(r.mspe_ppm);
        mspe_pm.push_back(r.mspe_pm);
        if (!std::isnan(r.coverage)) {
          cov.push_back(r.coverage);
          width.push_back(r.width);
        }
      }
      Aggregate a{tau, name, static_cast<long>(mspe.size()), excluded, kNaN, kNaN, kNaN, kNaN,
                  kNaN};
      if (!mspe.empty()) {
        a.mspe_mean = mean_of(mspe);
        a.mspe_pm_mean = mean_of(mspe_pm);
        double ss = 0.0;
        for (double v : mspe) ss += (v - a.mspe_mean) * (v - a.mspe_mean);
        a.mspe_se = mspe.size() > 1
                        ? std::sqrt(ss / double(mspe.size() - 1) / double(mspe.size()))
                        : kNaN;
      }
      if (!cov.empty()) {
        a.coverage_mean = mean_of(cov);
        a.width_mean = mean_of(width);
      }
      out.push_back(a);
    }
  }
  return out;
}

ExperimentResult run_experiment(const SimConfig& config) {
  config.validate();
  const size_t n_tau = config.taus.size();
  const size_t n_rep = static_cast<size_t>(config.replicates);
  const size_t tasks = n_tau * n_rep;
  std::vector<std::vector<ReplicateRecord>> slots(tasks);

  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(tasks));
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (size_t t = next++; t < tasks; t = next++) {
      try {
        slots[t] = run_replicate(config, t / n_rep, static_cast<long>(t % n_rep));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.config = config;
  for (auto& slot : slots)
    for (auto& r : slot) result.records.push_back(std::move(r));
  result.aggregates = aggregate(config, result.records);
  return result;
}

}  // namespace bshrink::simlab
