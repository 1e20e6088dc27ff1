#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inference.hpp"
#include "sampler.hpp"

namespace bshrink::simlab {

using model::Dataset;
using model::Phi;
using stat::Rng;

enum class BetaPattern {
  Diffuse,           // {j/100}, j = -49..49 (p = 99, includes an exact zero)
  Concentrated,      // eleven blocks of (0.1 x 8, 1.0) (p = 99)
  ConcentratedLike,  // the same 9-periodic pattern truncated to any p
  Custom,
};

enum class Violation { None, SkewedError, QuadraticMe, MixtureX };

const char* to_string(BetaPattern pattern);
const char* to_string(Violation violation);
BetaPattern parse_beta_pattern(const std::string& name);
Violation parse_violation(const std::string& name);

// Estimators compared in an experiment: the five Gibbs samplers, ridge with
// GCV on subsample A, and the predictor that knows the generating truth.
struct Estimator {
  enum class Kind { Bayes, Ridge, Truth } kind;
  sampler::Method method = sampler::Method::Vanilla;

  std::string name() const;
  static Estimator parse(const std::string& name);
};

struct SimConfig {
  Eigen::Index n_a = 50;
  Eigen::Index n_b = 400;
  Eigen::Index p = 99;
  BetaPattern beta_pattern = BetaPattern::Concentrated;
  Vector beta_custom;
  double r2 = 0.4;
  double beta0 = 0.0;
  std::vector<double> taus = {0.25, 0.5, 1.0, 1.5, 2.0};
  double rho = 0.15;
  double psi = 0.0;
  double nu = 1.0;
  Violation violation = Violation::None;
  long replicates = 250;
  Eigen::Index validation_n = 1000;
  sampler::ChainConfig chain;
  std::vector<Estimator> methods;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  double p_lo = 0.025;
  double p_hi = 0.975;
  inference::NoiseScale noise = inference::NoiseScale::StdDev;

  void validate() const;
};

// n_A=50, n_B=400, p=99, 250 replicates, burn-in 2500, 1000 stored draws.
SimConfig paper_profile();
// p=20, n_A=25, n_B=100, 20 replicates, 500 validation points, burn-in 500,
// 300 stored draws.
SimConfig desk_profile();

Vector beta_truth(BetaPattern pattern, Eigen::Index p, const Vector& custom = {});
Matrix equicorrelation(Eigen::Index p, double rho);
double sigma2_from_r2(const Vector& beta, const Matrix& sigma_x, double r2);

struct SimulatedData {
  Dataset data;
  Phi truth;
  Vector y_validation;
  Matrix x_validation;
};

SimulatedData generate_dataset(Rng& rng, const SimConfig& config, double tau);

struct ReplicateRecord {
  double tau;
  long replicate;
  std::string method;
  std::uint64_t seed;
  std::uint64_t stream;
  bool ok;
  std::string error;
  double sigma2;  // generating noise variance
  double mspe_ppm;
  double mspe_pm;
  double coverage;  // NaN where no intervals exist (ridge)
  double width;
  double lambda;    // final lambda, NaN where not applicable
  double seconds;
};

struct Aggregate {
  double tau;
  std::string method;
  long n_ok = 0;
  long n_excluded = 0;
  double mspe_mean;
  double mspe_se;
  double mspe_pm_mean;
  double coverage_mean;
  double width_mean;
};

struct ExperimentResult {
  SimConfig config;
  std::vector<ReplicateRecord> records;  // ordered by (tau, replicate, method)
  std::vector<Aggregate> aggregates;     // ordered by (tau, method)

  const Aggregate& aggregate(double tau, const std::string& method) const;
  std::vector<const ReplicateRecord*> records_for(double tau, const std::string& method) const;
};

// Replicate-level seeding: every (tau index, replicate) owns a derived
// stream, so metrics do not depend on scheduling or thread count.
Rng replicate_rng(std::uint64_t seed, size_t tau_index, long replicate);

std::vector<ReplicateRecord> run_replicate(const SimConfig& config, size_t tau_index,
                                           long replicate);

ExperimentResult run_experiment(const SimConfig& config);

std::vector<Aggregate> aggregate(const SimConfig& config,
                                 const std::vector<ReplicateRecord>& records);

}  // namespace bshrink::simlab
