#pragma once

// Seedable sampling primitives and dense SPD kernels shared by every module.
//
// Gamma laws are parameterized by (shape, rate) everywhere in this library:
// G{a, b} has density proportional to x^(a-1) exp(-b x) and mean a / b.
// Wishart W{d, S} has mean d * S.

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "error.hpp"

namespace bshrink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace stat {

// Deterministic random stream. The engine is std::mt19937_64 seeded by
// std::seed_seq over the 32-bit halves of (seed, stream); both are fully
// specified by the C++ standard, and every distribution below is
// implemented here rather than taken from <random>, so a (seed, stream) pair
// yields the same draws with any conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  // Independent child stream. Children are a pure function of
  // (seed, stream, key), never of how many draws this stream has made.
  Rng derive(std::uint64_t key) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal (Marsaglia polar method).
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct LowerTriangular {
  Matrix l;
};

// Factor of a symmetric positive-definite matrix. Throws NotPositiveDefinite
// when a pivot is <= 0 or non-finite, InvalidParameter when m is not square
// or not symmetric.
LowerTriangular cholesky(const Matrix& m);

// Symmetric positive-definite matrix together with its Cholesky factor.
class SpdMatrix {
 public:
  // Validates symmetry (1e-12 relative) and positive definiteness.
  explicit SpdMatrix(Matrix m);
  // Averages m with its transpose first; for results of floating-point
  // products that are symmetric only up to rounding.
  static SpdMatrix symmetrized(const Matrix& m);
  static SpdMatrix identity(Eigen::Index p);
  static SpdMatrix diagonal(const Vector& d);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  const Matrix& factor() const noexcept { return l_; }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;
  double log_det() const;

 private:
  SpdMatrix(Matrix m, Matrix l) : m_(std::move(m)), l_(std::move(l)) {}
  Matrix m_;
  Matrix l_;
};

void require_finite(std::span<const double> xs, const char* what);

Vector standard_normal_vector(Rng& rng, Eigen::Index p);

// mean + L z, z ~ N(0, I), L the Cholesky factor of cov.
Vector sample_mvnormal(Rng& rng, const Vector& mean, const SpdMatrix& cov);

// mean + L^{-T} z with L L^T = precision; the same law as
// sample_mvnormal(mean, precision^{-1}) without forming the inverse.
Vector sample_mvnormal_precision(Rng& rng, const Vector& mean, const SpdMatrix& precision);

double sample_gamma(Rng& rng, double shape, double rate);
double sample_inverse_gamma(Rng& rng, double shape, double rate);
double sample_chi_squared(Rng& rng, double dof);

// Bartlett construction. Requires dof > dim - 1.
SpdMatrix sample_wishart(Rng& rng, double dof, const SpdMatrix& scale);

// Draw from W{dof, inv_scale^{-1}} using L^{-T} (L the factor of inv_scale)
// as the square root of the scale, so the scale itself is never formed.
SpdMatrix sample_wishart_inverse_scale(Rng& rng, double dof, const SpdMatrix& inv_scale);

}  // namespace stat
}  // namespace bshrink
