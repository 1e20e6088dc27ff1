#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "inference.hpp"
#include "simlab.hpp"

namespace bshrink::io {

namespace fs = std::filesystem;
using nlohmann::json;

// "%.17g"; NaN becomes the empty string.
std::string format_double(double v);

// Dataset exchange: a CSV with header plus a JSON sidecar naming the column
// roles. Rows with subsample label "B" leave the x cells empty (ignored on
// read if present).
//
//   {"format": "bshrink-dataset", "version": 1, "csv": "data.csv", "p": 3,
//    "roles": {"subsample": "subsample", "y": "y",
//              "x": ["x1", "x2", "x3"], "w": ["w1", "w2", "w3"]}}
void write_dataset(const model::Dataset& data, const fs::path& csv, const fs::path& sidecar);
model::Dataset read_dataset(const fs::path& sidecar);

// Rows of a numeric CSV with a header. When names is non-empty those columns
// are selected (in order); otherwise every column is taken.
Matrix read_matrix_csv(const fs::path& path, const std::vector<std::string>& names = {});

// Simulation config keys mirror SimConfig:
//   profile, n_a, n_b, p, beta_pattern, beta_custom, r2, beta0, taus (or tau),
//   rho, psi, nu, violation, replicates, validation_n, methods, seed, threads,
//   p_lo, p_hi, noise ("stddev" | "variance"),
//   chain: {burn_in, stored_draws, ewig_block, me_variant ("scalar" | "per_gene")}
// "profile" (desk | paper) selects the base; other keys override it.
simlab::SimConfig sim_config_from_json(const json& j);
json sim_config_to_json(const simlab::SimConfig& config);

struct ResultsOptions {
  bool timing = false;  // wall time breaks byte-identity across runs
};

// Header: tau,replicate,method,seed,stream,ok,error,sigma2,mspe_ppm,mspe_pm,
// coverage,width,lambda[,seconds]
std::string results_csv(const simlab::ExperimentResult& result, const ResultsOptions& opt = {});
json summary_json(const simlab::ExperimentResult& result);
// results.csv, summary.json and config.json in dir.
void write_experiment(const simlab::ExperimentResult& result, const fs::path& dir,
                      const ResultsOptions& opt = {});

// Fit artifacts.
json fit_summary_json(const model::Dataset& data, const sampler::ChainOutput& chain,
                      const sampler::ChainConfig& config,
                      const inference::PosteriorSummary& summary);

// Flat little-endian float64 blocks, each row-major over draws, with a JSON
// sidecar listing {name, shape, offset} per block (offset in bytes).
void write_draws(const sampler::ChainOutput& chain, const fs::path& bin, const fs::path& sidecar);
sampler::ChainOutput read_draws(const fs::path& sidecar);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
json read_json(const fs::path& path);
// Two-space indented dump with a trailing newline.
void write_json(const fs::path& path, const json& j);

}  // namespace bshrink::io
