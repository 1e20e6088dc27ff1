#include "stat_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bshrink {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DegreesOfFreedomTooSmall: return "DegreesOfFreedomTooSmall";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DegenerateBeta: return "DegenerateBeta";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::ChainError: return "ChainError";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::PatternDimensionMismatch: return "PatternDimensionMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace stat {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

Rng Rng::derive(std::uint64_t key) const {
  return Rng(seed_, splitmix64(stream_ ^ splitmix64(key + 0x632be59bd9b4e019ULL)));
}

double Rng::uniform() {
  // 53 random bits, offset by half an ulp so 0 and 1 are unreachable.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::InvalidParameter, "Rng::below: n must be positive");
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

LowerTriangular cholesky(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    fail(ErrorCode::InvalidParameter, "cholesky: matrix must be square and non-empty");
  const double scale = m.cwiseAbs().maxCoeff();
  if (!std::isfinite(scale)) fail(ErrorCode::NotPositiveDefinite, "cholesky: non-finite entry");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    fail(ErrorCode::InvalidParameter, "cholesky: matrix is not symmetric");

  const Eigen::Index p = m.rows();
  Matrix l = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      std::ostringstream msg;
      msg << "cholesky: pivot " << j << " is " << pivot;
      fail(ErrorCode::NotPositiveDefinite, msg.str());
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < p; ++i)
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
  }
  return {std::move(l)};
}

SpdMatrix::SpdMatrix(Matrix m) {
  Matrix l = cholesky(m).l;
  m_ = std::move(m);
  l_ = std::move(l);
}

SpdMatrix SpdMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols())
    fail(ErrorCode::InvalidParameter, "SpdMatrix: matrix must be square");
  Matrix s = 0.5 * (m + m.transpose());
  return SpdMatrix(std::move(s));
}

SpdMatrix SpdMatrix::identity(Eigen::Index p) { return SpdMatrix(Matrix::Identity(p, p)); }

SpdMatrix SpdMatrix::diagonal(const Vector& d) { return SpdMatrix(Matrix(d.asDiagonal())); }

Vector SpdMatrix::solve(const Vector& b) const {
  const auto l = l_.triangularView<Eigen::Lower>();
  Vector y = l.solve(b);
  return l.transpose().solve(y);
}

Matrix SpdMatrix::solve(const Matrix& b) const {
  const auto l = l_.triangularView<Eigen::Lower>();
  Matrix y = l.solve(b);
  return l.transpose().solve(y);
}

Matrix SpdMatrix::inverse() const {
  Matrix inv = solve(Matrix(Matrix::Identity(dim(), dim())));
  return 0.5 * (inv + inv.transpose());
}

double SpdMatrix::log_det() const { return 2.0 * l_.diagonal().array().log().sum(); }

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs)
    if (!std::isfinite(x)) fail(ErrorCode::NonFinite, std::string(what) + ": non-finite value");
}

Vector standard_normal_vector(Rng& rng, Eigen::Index p) {
  Vector z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.normal();
  return z;
}

Vector sample_mvnormal(Rng& rng, const Vector& mean, const SpdMatrix& cov) {
  if (mean.size() != cov.dim())
    fail(ErrorCode::InvalidParameter, "sample_mvnormal: dimension mismatch");
  const Vector z = standard_normal_vector(rng, mean.size());
  return mean + cov.factor().triangularView<Eigen::Lower>() * z;
}

Vector sample_mvnormal_precision(Rng& rng, const Vector& mean, const SpdMatrix& precision) {
  if (mean.size() != precision.dim())
    fail(ErrorCode::InvalidParameter, "sample_mvnormal_precision: dimension mismatch");
  const Vector z = standard_normal_vector(rng, mean.size());
  return mean + precision.factor().triangularView<Eigen::Lower>().transpose().solve(z);
}

namespace {

// Marsaglia & Tsang (2000); valid for shape >= 1, unit rate.
double gamma_marsaglia_tsang(Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double sample_gamma(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << "sample_gamma: shape " << shape << " and rate " << rate << " must be positive";
    fail(ErrorCode::InvalidParameter, msg.str());
  }
  if (shape >= 1.0) return gamma_marsaglia_tsang(rng, shape) / rate;
  // G(a) = G(a + 1) * U^(1/a) for a < 1.
  const double g = gamma_marsaglia_tsang(rng, shape + 1.0);
  const double u = rng.uniform();
  return g * std::pow(u, 1.0 / shape) / rate;
}

double sample_inverse_gamma(Rng& rng, double shape, double rate) {
  return 1.0 / sample_gamma(rng, shape, rate);
}

double sample_chi_squared(Rng& rng, double dof) { return sample_gamma(rng, 0.5 * dof, 0.5); }

namespace {

// W = C A A^T C^T for any square root C C^T = S; A lower triangular with
// A_ii^2 ~ chi^2_{dof - i} and A_ij ~ N(0,1) below the diagonal.
SpdMatrix bartlett(Rng& rng, double dof, const Matrix& root) {
  const Eigen::Index p = root.rows();
  if (!(dof > static_cast<double>(p - 1))) {
    std::ostringstream msg;
    msg << "sample_wishart: " << dof << " degrees of freedom with dimension " << p;
    fail(ErrorCode::DegreesOfFreedomTooSmall, msg.str());
  }
  Matrix a = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(sample_chi_squared(rng, dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix ca = root * a;
  return SpdMatrix::symmetrized(ca * ca.transpose());
}

}  // namespace

SpdMatrix sample_wishart(Rng& rng, double dof, const SpdMatrix& scale) {
  return bartlett(rng, dof, scale.factor());
}

SpdMatrix sample_wishart_inverse_scale(Rng& rng, double dof, const SpdMatrix& inv_scale) {
  const Eigen::Index p = inv_scale.dim();
  Matrix root = inv_scale.factor()
                    .triangularView<Eigen::Lower>()
                    .transpose()
                    .solve(Matrix(Matrix::Identity(p, p)));
  return bartlett(rng, dof, root);
}

}  // namespace stat
}  // namespace bshrink
