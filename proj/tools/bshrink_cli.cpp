// Command-line front end. Everything goes through the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bshrink/bshrink.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int report(bshrink_status st) {
  if (st == BSHRINK_OK) return 0;
  std::cerr << "error: " << bshrink_status_string(st) << ": " << bshrink_last_error() << "\n";
  return 2;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

struct ChainFlags {
  std::string profile;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  long burn_in = -1;
  long draws = -1;
  long block = -1;
  bool per_gene = false;
};

void add_chain_flags(CLI::App* app, ChainFlags& f) {
  app->add_option("--profile", f.profile, "Chain lengths: desk (500 + 300) or paper (2500 + 1000)")
      ->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--stream", f.stream, "RNG stream");
  app->add_option("--burn-in", f.burn_in, "Burn-in sweeps");
  app->add_option("--draws", f.draws, "Stored draws");
  app->add_option("-K,--ewig-block", f.block, "EWiG update period");
  app->add_flag("--per-gene", f.per_gene, "Per-column measurement-error coefficients");
}

// Config file first, then profile, then explicit flags.
bshrink_chain_options chain_options(const ChainFlags& f, const json& file) {
  bshrink_chain_options o;
  bshrink_chain_options_default(&o);
  const json chain = file.value("chain", json::object());
  const std::string profile = !f.profile.empty() ? f.profile : file.value("profile", "");
  if (profile == "desk") {
    o.burn_in = 500;
    o.stored_draws = 300;
  }
  o.burn_in = chain.value("burn_in", o.burn_in);
  o.stored_draws = chain.value("stored_draws", o.stored_draws);
  o.ewig_block = chain.value("ewig_block", o.ewig_block);
  o.per_gene = chain.value("me_variant", std::string("scalar")) == "per_gene";
  o.seed = file.value("seed", o.seed);
  if (f.burn_in >= 0) o.burn_in = f.burn_in;
  if (f.draws >= 0) o.stored_draws = f.draws;
  if (f.block >= 0) o.ewig_block = f.block;
  if (f.per_gene) o.per_gene = 1;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shrinkage Gibbs samplers for regression with missing covariates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bshrink_version());

  // simulate / generate share the experiment config.
  std::string sim_config, sim_profile, sim_out = "results", sim_violation;
  std::uint64_t sim_seed = 0;
  long sim_reps = 0, sim_validation = 0;
  unsigned sim_threads = 0;
  std::vector<double> sim_taus;
  std::vector<std::string> sim_methods;
  bool sim_timing = false;
  size_t gen_tau = 0;
  long gen_rep = 0;
  auto add_sim_flags = [&](CLI::App* s) {
    s->add_option("-c,--config", sim_config, "JSON config file")->check(CLI::ExistingFile);
    s->add_option("--profile", sim_profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));
    s->add_option("--seed", sim_seed, "Master seed");
    s->add_option("--out", sim_out, "Output directory");
    s->add_option("--replicates", sim_reps, "Replicates per tau");
    s->add_option("--validation-n", sim_validation, "Validation points per replicate");
    s->add_option("--tau", sim_taus, "Measurement-error sd values");
    s->add_option("--methods", sim_methods,
                  "Subset of vanilla hierbetas ebbetas ebsigmax ebboth ridg truth");
    s->add_option("--violation", sim_violation, "none skewed_error quadratic_me mixture_x");
    s->add_option("--threads", sim_threads, "Worker threads (0: all cores)");
  };
  auto sim_json = [&](const CLI::App* s) {
    json j = load_config(sim_config);
    if (!sim_profile.empty()) j["profile"] = sim_profile;
    if (s->count("--seed")) j["seed"] = sim_seed;
    if (s->count("--replicates")) j["replicates"] = sim_reps;
    if (s->count("--validation-n")) j["validation_n"] = sim_validation;
    if (!sim_taus.empty()) {
      j.erase("tau");
      j["taus"] = sim_taus;
    }
    if (!sim_methods.empty()) j["methods"] = sim_methods;
    if (!sim_violation.empty()) j["violation"] = sim_violation;
    if (s->count("--threads")) j["threads"] = sim_threads;
    return j.dump();
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Run the simulation study");
  add_sim_flags(simulate);
  simulate->add_flag("--timing", sim_timing, "Add a wall-time column to results.csv");

  CLI::App* generate = app.add_subcommand("generate", "Write one simulated dataset");
  add_sim_flags(generate);
  generate->add_option("--tau-index", gen_tau, "Index into the tau list");
  generate->add_option("--replicate", gen_rep, "Replicate number");

  std::string fit_data, fit_method = "hierbetas", fit_out = "fit", fit_config;
  ChainFlags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "Fit one method to a dataset");
  fit->add_option("--data", fit_data, "Dataset JSON sidecar")->required()->check(CLI::ExistingFile);
  fit->add_option("--method", fit_method, "vanilla hierbetas ebbetas ebsigmax ebboth");
  fit->add_option("-c,--config", fit_config, "JSON file with method, seed and chain keys")
      ->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Output directory");
  add_chain_flags(fit, fit_flags);

  std::string pred_chain, pred_x, pred_out = "predict", pred_noise = "stddev";
  std::uint64_t pred_seed = 1;
  double pred_lo = 0.025, pred_hi = 0.975;
  CLI::App* predict = app.add_subcommand("predict", "Predict new rows from a fitted chain");
  predict->add_option("--chain", pred_chain, "Directory written by fit")->required()
      ->check(CLI::ExistingDirectory);
  predict->add_option("--x", pred_x, "CSV with columns x1..xp")->required()->check(CLI::ExistingFile);
  predict->add_option("--seed", pred_seed, "Seed for predictive draws");
  predict->add_option("--out", pred_out, "Output directory");
  predict->add_option("--lower", pred_lo, "Lower interval level");
  predict->add_option("--upper", pred_hi, "Upper interval level");
  predict->add_option("--noise", pred_noise, "Predictive noise scale")
      ->check(CLI::IsMember({"stddev", "variance"}));

  std::string gw_method = "vanilla", gw_out = "geweke", gw_profile;
  std::uint64_t gw_seed = 1;
  long gw_iters = -1;
  size_t gw_p = 2, gw_na = 4, gw_nb = 4;
  bool gw_mutate = false;
  CLI::App* geweke = app.add_subcommand("geweke", "Joint-distribution self-test of the sampler");
  geweke->add_option("--method", gw_method, "Method to check");
  geweke->add_option("--iterations", gw_iters, "Sweeps (default: 1e4 desk, 1e5 paper)");
  geweke->add_option("--profile", gw_profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  geweke->add_option("--p", gw_p, "Covariates");
  geweke->add_option("--n-a", gw_na, "Subsample A size");
  geweke->add_option("--n-b", gw_nb, "Subsample B size");
  geweke->add_option("--seed", gw_seed, "Seed");
  geweke->add_option("--out", gw_out, "Output directory");
  geweke->add_flag("--mutate-sigma2", gw_mutate, "Use a deliberately wrong sigma2 step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const int rc = report(bshrink_simulate(sim_json(simulate).c_str(), sim_out.c_str(), sim_timing));
      if (rc == 0) std::cout << "wrote " << (fs::path(sim_out) / "results.csv").string() << "\n";
      return rc;
    }
    if (generate->parsed()) {
      const int rc = report(bshrink_generate(sim_json(generate).c_str(), gen_tau, gen_rep, sim_out.c_str()));
      if (rc == 0) std::cout << "wrote " << (fs::path(sim_out) / "data.json").string() << "\n";
      return rc;
    }
    if (fit->parsed()) {
      const json file = load_config(fit_config);
      bshrink_chain_options o = chain_options(fit_flags, file);
      if (fit->count("--seed")) o.seed = fit_flags.seed;
      if (fit->count("--stream")) o.stream = fit_flags.stream;
      std::string method = fit->count("--method") ? fit_method : file.value("method", fit_method);
      bshrink_method m;
      if (const bshrink_status st = bshrink_method_from_name(method.c_str(), &m)) return report(st);
      const int rc = report(bshrink_fit_files(fit_data.c_str(), m, &o, fit_out.c_str()));
      if (rc == 0) std::cout << "wrote " << (fs::path(fit_out) / "summary.json").string() << "\n";
      return rc;
    }
    if (predict->parsed()) {
      fs::create_directories(pred_out);
      const std::string out = (fs::path(pred_out) / "predictions.csv").string();
      const bshrink_noise noise = pred_noise == "variance" ? BSHRINK_NOISE_VARIANCE : BSHRINK_NOISE_STDDEV;
      const int rc = report(bshrink_predict_files(pred_chain.c_str(), pred_x.c_str(), pred_seed, pred_lo,
                                                  pred_hi, noise, out.c_str()));
      if (rc == 0) std::cout << "wrote " << out << "\n";
      return rc;
    }
    if (geweke->parsed()) {
      if (gw_iters < 0) gw_iters = gw_profile == "desk" ? 10000 : 100000;
      bshrink_method m;
      if (const bshrink_status st = bshrink_method_from_name(gw_method.c_str(), &m)) return report(st);
      fs::create_directories(gw_out);
      const std::string out =
          (fs::path(gw_out) / ("geweke_" + gw_method + (gw_mutate ? "_mutated" : "") + ".json")).string();
      double max_z = 0.0;
      const int rc = report(bshrink_geweke(m, gw_p, gw_na, gw_nb, gw_iters, gw_seed, gw_mutate,
                                           out.c_str(), &max_z));
      if (rc == 0) {
        char line[160];
        std::snprintf(line, sizeof line, "%s: %ld sweeps, max |z| = %.3f\n", gw_method.c_str(),
                      gw_iters, max_z);
        std::cout << line << "wrote " << out << "\n";
      }
      return rc;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
