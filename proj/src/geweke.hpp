#pragma once

// Joint-distribution ("getting it right") check of the Gibbs kernels.
//
// Two simulators target the same joint law of (phi, data):
//   marginal-conditional: phi from the prior, then data from the likelihood;
//   successive-conditional: one Gibbs sweep given data, then data re-drawn
//   given the current (phi, x_B), repeated.
// Any kernel that does not leave the posterior invariant shows up as a
// moment discrepancy. Improper default priors are swapped for proper ones
// (geweke_priors), and eta is held fixed: an EWiG M-step is not a Markov
// kernel for a fixed prior, so EBBETAS is checked with the M-step frozen.

#include <cstdint>
#include <string>
#include <vector>

#include "sampler.hpp"

namespace bshrink::sampler {

struct GewekeDims {
  Eigen::Index p = 2;
  Eigen::Index n_a = 4;
  Eigen::Index n_b = 4;
};

struct GewekeOptions {
  std::uint64_t seed = 1;
  // Gibbs-side standard errors use this many batch means.
  long batches = 100;
  // Adds one to the sigma2 shape: a known-wrong kernel the check must flag.
  bool mutate_sigma2_shape = false;
  double fixed_lambda = 1.0;
};

struct GewekeStat {
  std::string name;
  double forward_mean;
  double forward_se;
  double gibbs_mean;
  double gibbs_se;
  double z;
};

struct GewekeReport {
  Method method;
  GewekeDims dims;
  long iterations = 0;
  std::vector<GewekeStat> stats;

  double max_abs_z() const;
};

model::Priors geweke_priors();

GewekeReport geweke_joint_check(Method method, const GewekeDims& dims, long iterations,
                                const GewekeOptions& options = {});

}  // namespace bshrink::sampler
