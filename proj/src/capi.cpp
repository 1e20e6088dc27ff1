#include "bshrink/bshrink.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <new>
#include <string>

#include "geweke.hpp"
#include "io.hpp"
#include "ridge_baseline.hpp"

using namespace bshrink;

struct bshrink_dataset {
  model::Dataset data;
};

struct bshrink_chain {
  sampler::ChainOutput chain;
  inference::PosteriorSummary summary;
  io::json meta;  // fit summary as written to summary.json
};

namespace {

thread_local std::string g_last_error;

bshrink_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return BSHRINK_E_INVALID_PARAMETER;
    case ErrorCode::NotPositiveDefinite: return BSHRINK_E_NOT_POSITIVE_DEFINITE;
    case ErrorCode::DegreesOfFreedomTooSmall: return BSHRINK_E_DOF_TOO_SMALL;
    case ErrorCode::SingularDesign: return BSHRINK_E_SINGULAR_DESIGN;
    case ErrorCode::DegenerateBeta: return BSHRINK_E_DEGENERATE_BETA;
    case ErrorCode::DegenerateColumn: return BSHRINK_E_DEGENERATE_COLUMN;
    case ErrorCode::NonFinite: return BSHRINK_E_NON_FINITE;
    case ErrorCode::DimensionError: return BSHRINK_E_DIMENSION;
    case ErrorCode::ChainError: return BSHRINK_E_CHAIN;
    case ErrorCode::EmptyGrid: return BSHRINK_E_EMPTY_GRID;
    case ErrorCode::PatternDimensionMismatch: return BSHRINK_E_PATTERN_DIMENSION;
    case ErrorCode::ConfigError: return BSHRINK_E_CONFIG;
    case ErrorCode::IoError: return BSHRINK_E_IO;
  }
  return BSHRINK_E_INTERNAL;
}

template <class F>
bshrink_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return BSHRINK_OK;
  } catch (const ChainError& e) {
    g_last_error = e.what();
    return BSHRINK_E_CHAIN;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BSHRINK_E_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return BSHRINK_E_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BSHRINK_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BSHRINK_E_INTERNAL;
  }
}

Matrix row_major(const double* v, size_t rows, size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) m(Eigen::Index(i), Eigen::Index(j)) = v[i * cols + j];
  return m;
}

sampler::ChainConfig chain_config(const bshrink_chain_options* options) {
  bshrink_chain_options o;
  bshrink_chain_options_default(&o);
  if (options) o = *options;
  sampler::ChainConfig c;
  c.seed = o.seed;
  c.stream = o.stream;
  c.burn_in = o.burn_in;
  c.stored_draws = o.stored_draws;
  c.ewig_block = o.ewig_block;
  c.me_variant = o.per_gene ? model::MeVariant::PerGene : model::MeVariant::Scalar;
  return c;
}

sampler::Method to_method(bshrink_method m) {
  switch (m) {
    case BSHRINK_VANILLA: return sampler::Method::Vanilla;
    case BSHRINK_HIERBETAS: return sampler::Method::HierBetas;
    case BSHRINK_EBBETAS: return sampler::Method::EbBetas;
    case BSHRINK_EBSIGMAX: return sampler::Method::EbSigmaX;
    case BSHRINK_EBBOTH: return sampler::Method::EbBoth;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown method code");
}

bshrink_chain* fit_chain(const model::Dataset& data, bshrink_method method,
                         const bshrink_chain_options* options) {
  const sampler::ChainConfig config = chain_config(options);
  auto out = std::make_unique<bshrink_chain>();
  out->chain = sampler::run_chain(data, to_method(method), config);
  out->summary = inference::summarize(out->chain);
  out->meta = io::fit_summary_json(data, out->chain, config, out->summary);
  return out.release();
}

void save_chain(const bshrink_chain& c, const io::fs::path& dir) {
  io::fs::create_directories(dir);
  io::write_json(dir / "summary.json", c.meta);
  io::write_draws(c.chain, dir / "draws.bin", dir / "draws.json");
  const Matrix& xb = c.chain.xb_mean;
  std::string text;
  for (Eigen::Index j = 0; j < xb.cols(); ++j) text += (j ? ",x" : "x") + std::to_string(j + 1);
  text += "\n";
  for (Eigen::Index i = 0; i < xb.rows(); ++i) {
    for (Eigen::Index j = 0; j < xb.cols(); ++j) text += (j ? "," : "") + io::format_double(xb(i, j));
    text += "\n";
  }
  io::write_text(dir / "xb_mean.csv", text);
}

void predict_rows(const bshrink_chain& c, const Matrix& x, std::uint64_t seed, double p_lo,
                  double p_hi, bshrink_noise noise, double* point, double* lo, double* hi) {
  const Eigen::Index p = c.summary.beta_ppm.size();
  if (x.cols() != p) throw Error(ErrorCode::DimensionError, "x_new must have p columns");
  if (!(0.0 < p_lo && p_lo < p_hi && p_hi < 1.0))
    throw Error(ErrorCode::InvalidParameter, "levels must satisfy 0 < p_lo < p_hi < 1");
  const inference::NoiseScale ns =
      noise == BSHRINK_NOISE_VARIANCE ? inference::NoiseScale::Variance
                                      : inference::NoiseScale::StdDev;
  stat::Rng rng(seed, 0x707265646963ULL);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    if (point) point[i] = c.summary.beta0_hat + xi.dot(c.summary.beta_ppm);
    if (lo || hi) {
      const auto draws = inference::predictive_draws(rng, c.chain, xi, ns);
      const inference::Interval iv = inference::prediction_interval(draws, p_lo, p_hi);
      if (lo) lo[i] = iv.lo;
      if (hi) hi[i] = iv.hi;
    }
  }
}

simlab::SimConfig parse_config(const char* config_json) {
  io::json j = io::json::object();
  if (config_json && *config_json) {
    try {
      j = io::json::parse(config_json);
    } catch (const io::json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
  }
  return io::sim_config_from_json(j);
}

}  // namespace

extern "C" {

const char* bshrink_version(void) { return "0.1.0"; }

const char* bshrink_last_error(void) { return g_last_error.c_str(); }

const char* bshrink_status_string(bshrink_status status) {
  switch (status) {
    case BSHRINK_OK: return "ok";
    case BSHRINK_E_INVALID_PARAMETER: return "invalid parameter";
    case BSHRINK_E_NOT_POSITIVE_DEFINITE: return "matrix not positive definite";
    case BSHRINK_E_DOF_TOO_SMALL: return "degrees of freedom too small";
    case BSHRINK_E_SINGULAR_DESIGN: return "singular design";
    case BSHRINK_E_DEGENERATE_BETA: return "degenerate beta";
    case BSHRINK_E_DEGENERATE_COLUMN: return "degenerate column";
    case BSHRINK_E_NON_FINITE: return "non-finite value";
    case BSHRINK_E_DIMENSION: return "dimension mismatch";
    case BSHRINK_E_CHAIN: return "chain failed";
    case BSHRINK_E_EMPTY_GRID: return "empty grid";
    case BSHRINK_E_PATTERN_DIMENSION: return "beta pattern does not fit p";
    case BSHRINK_E_CONFIG: return "invalid configuration";
    case BSHRINK_E_IO: return "i/o error";
    case BSHRINK_E_NULL_ARGUMENT: return "null argument";
    case BSHRINK_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* bshrink_method_name(bshrink_method method) {
  try {
    return sampler::to_string(to_method(method));
  } catch (...) {
    return "unknown";
  }
}

bshrink_status bshrink_method_from_name(const char* name, bshrink_method* out) {
  if (!name || !out) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] {
    *out = static_cast<bshrink_method>(static_cast<int>(sampler::parse_method(name)));
  });
}

bshrink_status bshrink_dataset_create(size_t p, size_t n_a, const double* y_a, const double* x_a,
                                      const double* w_a, size_t n_b, const double* y_b,
                                      const double* w_b, bshrink_dataset** out) {
  if (!out || !y_a || !x_a || !w_a || (n_b > 0 && (!y_b || !w_b))) return BSHRINK_E_NULL_ARGUMENT;
  *out = nullptr;
  return guarded([&] {
    auto d = std::make_unique<bshrink_dataset>();
    d->data.y_a = Eigen::Map<const Vector>(y_a, Eigen::Index(n_a));
    d->data.x_a = row_major(x_a, n_a, p);
    d->data.w_a = row_major(w_a, n_a, p);
    d->data.y_b = n_b ? Vector(Eigen::Map<const Vector>(y_b, Eigen::Index(n_b))) : Vector(0);
    d->data.w_b = n_b ? row_major(w_b, n_b, p) : Matrix(0, Eigen::Index(p));
    d->data.validate();
    *out = d.release();
  });
}

bshrink_status bshrink_dataset_load(const char* sidecar_path, bshrink_dataset** out) {
  if (!sidecar_path || !out) return BSHRINK_E_NULL_ARGUMENT;
  *out = nullptr;
  return guarded([&] { *out = new bshrink_dataset{io::read_dataset(sidecar_path)}; });
}

bshrink_status bshrink_dataset_save(const bshrink_dataset* data, const char* csv_path,
                                    const char* sidecar_path) {
  if (!data || !csv_path || !sidecar_path) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] { io::write_dataset(data->data, csv_path, sidecar_path); });
}

bshrink_status bshrink_dataset_dims(const bshrink_dataset* data, size_t* p, size_t* n_a,
                                    size_t* n_b) {
  if (!data) return BSHRINK_E_NULL_ARGUMENT;
  if (p) *p = static_cast<size_t>(data->data.p());
  if (n_a) *n_a = static_cast<size_t>(data->data.n_a());
  if (n_b) *n_b = static_cast<size_t>(data->data.n_b());
  return BSHRINK_OK;
}

void bshrink_dataset_free(bshrink_dataset* data) { delete data; }

void bshrink_chain_options_default(bshrink_chain_options* options) {
  if (!options) return;
  const sampler::ChainConfig c;
  options->seed = c.seed;
  options->stream = c.stream;
  options->burn_in = c.burn_in;
  options->stored_draws = c.stored_draws;
  options->ewig_block = c.ewig_block;
  options->per_gene = 0;
}

bshrink_status bshrink_fit(const bshrink_dataset* data, bshrink_method method,
                           const bshrink_chain_options* options, bshrink_chain** out) {
  if (!data || !out) return BSHRINK_E_NULL_ARGUMENT;
  *out = nullptr;
  return guarded([&] { *out = fit_chain(data->data, method, options); });
}

bshrink_status bshrink_chain_dims(const bshrink_chain* chain, size_t* p, size_t* draws) {
  if (!chain) return BSHRINK_E_NULL_ARGUMENT;
  if (p) *p = static_cast<size_t>(chain->summary.beta_ppm.size());
  if (draws) *draws = chain->chain.draws.size();
  return BSHRINK_OK;
}

bshrink_status bshrink_chain_summary(const bshrink_chain* chain, double* beta0_hat,
                                     double* beta_ppm, double* beta_pm, double* lambda_final) {
  if (!chain) return BSHRINK_E_NULL_ARGUMENT;
  const auto& s = chain->summary;
  if (beta0_hat) *beta0_hat = s.beta0_hat;
  if (beta_ppm) std::copy(s.beta_ppm.begin(), s.beta_ppm.end(), beta_ppm);
  if (beta_pm) std::copy(s.beta_pm.begin(), s.beta_pm.end(), beta_pm);
  if (lambda_final) *lambda_final = chain->chain.final_hyper.lambda;
  return BSHRINK_OK;
}

bshrink_status bshrink_chain_save(const bshrink_chain* chain, const char* dir) {
  if (!chain || !dir) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] { save_chain(*chain, dir); });
}

bshrink_status bshrink_chain_load(const char* dir, bshrink_chain** out) {
  if (!dir || !out) return BSHRINK_E_NULL_ARGUMENT;
  *out = nullptr;
  return guarded([&] {
    const io::fs::path d(dir);
    auto c = std::make_unique<bshrink_chain>();
    c->chain = io::read_draws(d / "draws.json");
    if (c->chain.draws.empty()) throw Error(ErrorCode::IoError, "saved chain has no draws");
    c->summary = inference::summarize(c->chain);
    if (io::fs::exists(d / "summary.json")) c->meta = io::read_json(d / "summary.json");
    *out = c.release();
  });
}

bshrink_status bshrink_predict(const bshrink_chain* chain, const double* x_new, size_t rows,
                               uint64_t seed, double p_lo, double p_hi, bshrink_noise noise,
                               double* point, double* lo, double* hi) {
  if (!chain || (rows > 0 && !x_new)) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] {
    const size_t p = static_cast<size_t>(chain->summary.beta_ppm.size());
    predict_rows(*chain, row_major(x_new, rows, p), seed, p_lo, p_hi, noise, point, lo, hi);
  });
}

void bshrink_chain_free(bshrink_chain* chain) { delete chain; }

bshrink_status bshrink_simulate(const char* config_json, const char* out_dir, int timing) {
  if (!out_dir) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] {
    const simlab::SimConfig config = parse_config(config_json);
    const simlab::ExperimentResult result = simlab::run_experiment(config);
    io::write_experiment(result, out_dir, io::ResultsOptions{timing != 0});
  });
}

bshrink_status bshrink_generate(const char* config_json, size_t tau_index, long replicate,
                                const char* out_dir) {
  if (!out_dir) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] {
    const simlab::SimConfig config = parse_config(config_json);
    if (tau_index >= config.taus.size())
      throw Error(ErrorCode::ConfigError, "tau index out of range");
    if (replicate < 0) throw Error(ErrorCode::ConfigError, "replicate must be >= 0");
    stat::Rng data_rng = simlab::replicate_rng(config.seed, tau_index, replicate).derive(0);
    const simlab::SimulatedData sim =
        simlab::generate_dataset(data_rng, config, config.taus[tau_index]);
    const io::fs::path dir(out_dir);
    io::fs::create_directories(dir);
    io::write_dataset(sim.data, dir / "data.csv", dir / "data.json");
    std::string text = "y";
    for (Eigen::Index j = 1; j <= config.p; ++j) text += ",x" + std::to_string(j);
    text += "\n";
    for (Eigen::Index i = 0; i < sim.x_validation.rows(); ++i) {
      text += io::format_double(sim.y_validation[i]);
      for (Eigen::Index j = 0; j < config.p; ++j) text += "," + io::format_double(sim.x_validation(i, j));
      text += "\n";
    }
    io::write_text(dir / "validation.csv", text);
  });
}

bshrink_status bshrink_fit_files(const char* dataset_sidecar, bshrink_method method,
                                 const bshrink_chain_options* options, const char* out_dir) {
  if (!dataset_sidecar || !out_dir) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] {
    const model::Dataset data = io::read_dataset(dataset_sidecar);
    std::unique_ptr<bshrink_chain> c(fit_chain(data, method, options));
    save_chain(*c, out_dir);
  });
}

bshrink_status bshrink_predict_files(const char* chain_dir, const char* x_csv, uint64_t seed,
                                     double p_lo, double p_hi, bshrink_noise noise,
                                     const char* out_csv) {
  if (!chain_dir || !x_csv || !out_csv) return BSHRINK_E_NULL_ARGUMENT;
  bshrink_chain* raw = nullptr;
  const bshrink_status st = bshrink_chain_load(chain_dir, &raw);
  if (st != BSHRINK_OK) return st;
  std::unique_ptr<bshrink_chain> c(raw);
  return guarded([&] {
    const Eigen::Index p = c->summary.beta_ppm.size();
    std::vector<std::string> names;
    for (Eigen::Index j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
    const Matrix x = io::read_matrix_csv(x_csv, names);
    std::vector<double> point(size_t(x.rows())), lo(size_t(x.rows())), hi(size_t(x.rows()));
    predict_rows(*c, x, seed, p_lo, p_hi, noise, point.data(), lo.data(), hi.data());
    std::string text = "row,prediction,lower,upper\n";
    for (size_t i = 0; i < point.size(); ++i)
      text += std::to_string(i) + "," + io::format_double(point[i]) + "," +
              io::format_double(lo[i]) + "," + io::format_double(hi[i]) + "\n";
    io::write_text(out_csv, text);
  });
}

bshrink_status bshrink_geweke(bshrink_method method, size_t p, size_t n_a, size_t n_b,
                              long iterations, uint64_t seed, int mutate_sigma2,
                              const char* out_json, double* max_abs_z) {
  return guarded([&] {
    sampler::GewekeDims dims{Eigen::Index(p), Eigen::Index(n_a), Eigen::Index(n_b)};
    sampler::GewekeOptions opt;
    opt.seed = seed;
    opt.mutate_sigma2_shape = mutate_sigma2 != 0;
    const sampler::GewekeReport r =
        sampler::geweke_joint_check(to_method(method), dims, iterations, opt);
    if (max_abs_z) *max_abs_z = r.max_abs_z();
    if (!out_json) return;
    io::json stats = io::json::array();
    for (const auto& s : r.stats)
      stats.push_back({{"name", s.name},
                       {"forward_mean", s.forward_mean},
                       {"forward_se", s.forward_se},
                       {"gibbs_mean", s.gibbs_mean},
                       {"gibbs_se", s.gibbs_se},
                       {"z", s.z}});
    io::write_json(out_json, {{"format", "bshrink-geweke"},
                              {"method", sampler::to_string(r.method)},
                              {"p", p},
                              {"n_a", n_a},
                              {"n_b", n_b},
                              {"iterations", iterations},
                              {"seed", seed},
                              {"mutate_sigma2", mutate_sigma2 != 0},
                              {"batches", opt.batches},
                              {"max_abs_z", r.max_abs_z()},
                              {"stats", stats}});
  });
}

bshrink_status bshrink_ridge_gcv(const double* y, const double* x, size_t n, size_t p,
                                 double* beta0, double* beta, double* lambda_star) {
  if (!y || !x) return BSHRINK_E_NULL_ARGUMENT;
  return guarded([&] {
    const Vector yv = Eigen::Map<const Vector>(y, Eigen::Index(n));
    const Matrix xm = row_major(x, n, p);
    const ridge::RidgeFit fit = ridge::gcv_select(yv, xm, ridge::default_grid(xm));
    if (beta0) *beta0 = fit.beta0_hat;
    if (beta) std::copy(fit.beta_hat.begin(), fit.beta_hat.end(), beta);
    if (lambda_star) *lambda_star = fit.lambda_star;
  });
}

}  // extern "C"
