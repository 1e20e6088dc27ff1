#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "stat_core.hpp"

using namespace bshrink;
using namespace bshrink::stat;

namespace {

Matrix draws_mvn(Rng& rng, const Vector& mean, const SpdMatrix& cov, int n) {
  Matrix out(n, mean.size());
  for (int i = 0; i < n; ++i) out.row(i) = sample_mvnormal(rng, mean, cov).transpose();
  return out;
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("same seed and stream give the same sequence") {
    Rng a(42, 7), b(42, 7), c(42, 8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      differs |= x != c.next_u64();
    }
    CHECK(differs);
  }

  TEST_CASE("derive does not depend on draws already made") {
    Rng a(5), b(5);
    for (int i = 0; i < 17; ++i) b.normal();
    Rng ca = a.derive(3), cb = b.derive(3);
    for (int i = 0; i < 10; ++i) CHECK(ca.next_u64() == cb.next_u64());
    CHECK(a.derive(3).stream() != a.derive(4).stream());
  }

  TEST_CASE("uniform stays inside the open unit interval") {
    Rng r(1);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = r.uniform();
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(sum / 1e5 == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("below covers its range evenly") {
    Rng r(9);
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 30000; ++i) ++counts[r.below(3)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 400);
  }

  TEST_CASE("standard normal moments and distribution") {
    Rng r(11);
    std::vector<double> xs(100000);
    for (double& x : xs) x = r.normal();
    CHECK(std::abs(oracle::mean(xs)) < 0.01);
    CHECK(oracle::variance(xs) == doctest::Approx(1.0).epsilon(0.02));
    const double ks =
        oracle::ks_statistic(xs, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    CHECK(ks < 0.01);
  }
}

TEST_SUITE("cholesky") {
  TEST_CASE("identity") {
    const LowerTriangular l = cholesky(Matrix::Identity(3, 3));
    CHECK((l.l - Matrix::Identity(3, 3)).norm() == 0.0);
  }

  TEST_CASE("hand-expanded 2x2") {
    Matrix m(2, 2);
    m << 4, 2, 2, 3;
    const Matrix l = cholesky(m).l;
    CHECK(l(0, 0) == doctest::Approx(2.0));
    CHECK(l(0, 1) == 0.0);
    CHECK(l(1, 0) == doctest::Approx(1.0));
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("diagonal") {
    Matrix m = Matrix::Zero(2, 2);
    m.diagonal() << 9, 16;
    const Matrix l = cholesky(m).l;
    CHECK(l(0, 0) == doctest::Approx(3.0));
    CHECK(l(1, 1) == doctest::Approx(4.0));
    CHECK(l(1, 0) == 0.0);
  }

  TEST_CASE("recovers a random well-conditioned factor") {
    Rng r(3);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Index p = 1 + trial % 6;
      Matrix l = Matrix::Zero(p, p);
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) l(i, j) = 0.3 * r.normal();
        l(i, i) = 1.0 + r.uniform();
      }
      const Matrix got = cholesky(l * l.transpose()).l;
      CHECK((got - l).norm() / l.norm() < 1e-9);
    }
  }

  TEST_CASE("rejects indefinite, asymmetric and non-square input") {
    Matrix m(2, 2);
    m << 1, 2, 2, 1;
    CHECK_THROWS_AS(cholesky(m), Error);
    try {
      cholesky(m);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    }
    Matrix a(2, 2);
    a << 2, 1, 0, 2;
    try {
      cholesky(a);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidParameter);
    }
    CHECK_THROWS_AS(cholesky(Matrix::Ones(2, 3)), Error);
  }

  TEST_CASE("SpdMatrix solve, inverse and log-determinant") {
    Rng r(4);
    auto normal = [&] { return r.normal(); };
    const Matrix m = oracle::random_spd(normal, 4);
    const SpdMatrix s(m);
    const Vector b = Vector::LinSpaced(4, -1.0, 2.0);
    CHECK((s.solve(b) - m.fullPivLu().solve(b)).norm() < 1e-10);
    CHECK((s.inverse() - m.inverse()).norm() < 1e-10);
    CHECK(s.log_det() == doctest::Approx(std::log(m.determinant())).epsilon(1e-12));
  }
}

TEST_SUITE("mvnormal") {
  TEST_CASE("fixed seed reproduces the vector") {
    Rng a(8), b(8);
    const Vector m = Vector::Zero(3);
    const SpdMatrix id = SpdMatrix::identity(3);
    CHECK(sample_mvnormal(a, m, id) == sample_mvnormal(b, m, id));
  }

  TEST_CASE("bivariate moments over 1e5 draws") {
    Rng r(21);
    Vector mean(2);
    mean << 1, 2;
    Matrix cov(2, 2);
    cov << 2, 0.5, 0.5, 1;
    const Matrix d = draws_mvn(r, mean, SpdMatrix(cov), 100000);
    CHECK((oracle::row_mean(d) - mean).cwiseAbs().maxCoeff() < 0.02);
    CHECK((oracle::row_cov(d) - cov).cwiseAbs().maxCoeff() < 0.05);
  }

  TEST_CASE("univariate variance within 3%") {
    Rng r(22);
    Matrix cov(1, 1);
    cov << 2.25;
    const Matrix d = draws_mvn(r, Vector::Constant(1, -3.0), SpdMatrix(cov), 100000);
    CHECK(oracle::row_cov(d)(0, 0) == doctest::Approx(2.25).epsilon(0.03));
  }

  TEST_CASE("precision form has covariance equal to the inverse precision") {
    Rng r(23);
    Matrix prec(2, 2);
    prec << 3, -1, -1, 2;
    Matrix d(100000, 2);
    for (int i = 0; i < d.rows(); ++i)
      d.row(i) = sample_mvnormal_precision(r, Vector::Ones(2), SpdMatrix(prec)).transpose();
    CHECK((oracle::row_mean(d) - Vector::Ones(2)).cwiseAbs().maxCoeff() < 0.01);
    CHECK((oracle::row_cov(d) - prec.inverse()).cwiseAbs().maxCoeff() < 0.01);
  }
}

TEST_SUITE("gamma") {
  TEST_CASE("exponential case") {
    Rng r(31);
    std::vector<double> xs(100000);
    for (double& x : xs) x = sample_gamma(r, 1.0, 1.0);
    CHECK(oracle::mean(xs) == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("mean a/b and distribution for several shapes") {
    for (double shape : {0.3, 1.0, 2.5, 40.0}) {
      Rng r(32);
      const double rate = 1.7;
      std::vector<double> xs(100000);
      for (double& x : xs) x = sample_gamma(r, shape, rate);
      CHECK(oracle::mean(xs) == doctest::Approx(shape / rate).epsilon(0.02));
      const double ks = oracle::ks_statistic(
          xs, [&](double x) { return oracle::gamma_cdf(x, shape, rate); });
      CHECK(ks < 0.01);
    }
  }

  TEST_CASE("non-positive parameters are rejected") {
    Rng r(1);
    CHECK_THROWS_AS(sample_gamma(r, 0.0, 1.0), Error);
    CHECK_THROWS_AS(sample_gamma(r, 1.0, 0.0), Error);
    CHECK_THROWS_AS(sample_gamma(r, -2.0, 1.0), Error);
    CHECK_THROWS_AS(sample_gamma(r, std::nan(""), 1.0), Error);
  }

  TEST_CASE("inverse gamma mean over 1e6 draws") {
    Rng r(33);
    double s = 0.0;
    for (int i = 0; i < 1000000; ++i) s += sample_inverse_gamma(r, 3.0, 2.0);
    CHECK(s / 1e6 == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("reciprocal of an inverse gamma draw is gamma") {
    Rng r(34);
    std::vector<double> xs(100000);
    for (double& x : xs) x = 1.0 / sample_inverse_gamma(r, 2.5, 0.8);
    CHECK(oracle::ks_statistic(xs, [](double x) { return oracle::gamma_cdf(x, 2.5, 0.8); }) <
          0.01);
  }

  TEST_CASE("inverse gamma rejects non-positive shape") {
    Rng r(1);
    CHECK_THROWS_AS(sample_inverse_gamma(r, 0.0, 1.0), Error);
    CHECK_THROWS_AS(sample_inverse_gamma(r, -1.0, 1.0), Error);
  }

  TEST_CASE("chi-squared mean equals dof") {
    Rng r(35);
    double s = 0.0;
    for (int i = 0; i < 100000; ++i) s += sample_chi_squared(r, 7.0);
    CHECK(s / 1e5 == doctest::Approx(7.0).epsilon(0.02));
  }
}

TEST_SUITE("wishart") {
  TEST_CASE("W{5, I2} mean within 2%") {
    Rng r(41);
    Matrix sum = Matrix::Zero(2, 2);
    for (int i = 0; i < 100000; ++i) sum += sample_wishart(r, 5.0, SpdMatrix::identity(2)).matrix();
    const Matrix mean = sum / 1e5;
    CHECK(mean(0, 0) == doctest::Approx(5.0).epsilon(0.02));
    CHECK(mean(1, 1) == doctest::Approx(5.0).epsilon(0.02));
    CHECK(std::abs(mean(0, 1)) < 0.1);
  }

  TEST_CASE("one-dimensional Wishart is Gamma(d/2, scale 2s)") {
    Rng r(42);
    const double d = 3.0, s = 1.5;
    std::vector<double> xs(100000);
    Matrix scale(1, 1);
    scale << s;
    const SpdMatrix sc(scale);
    for (double& x : xs) x = sample_wishart(r, d, sc).matrix()(0, 0);
    const double ks =
        oracle::ks_statistic(xs, [&](double x) { return oracle::gamma_cdf(x, d / 2, 1 / (2 * s)); });
    CHECK(ks < 0.01);
  }

  TEST_CASE("dof = dim - 1 is rejected") {
    Rng r(1);
    try {
      sample_wishart(r, 2.0, SpdMatrix::identity(3));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegreesOfFreedomTooSmall);
    }
    CHECK_NOTHROW(sample_wishart(r, 2.5, SpdMatrix::identity(3)));
  }

  TEST_CASE("every draw is positive definite") {
    Rng r(43);
    Matrix scale(3, 3);
    scale << 2, 0.3, 0.1, 0.3, 1, 0.2, 0.1, 0.2, 0.5;
    const SpdMatrix sc(scale);
    int ok = 0;
    for (int i = 0; i < 10000; ++i) {
      const Matrix w = sample_wishart(r, 3.2, sc).matrix();
      ok += Eigen::SelfAdjointEigenSolver<Matrix>(w).eigenvalues().minCoeff() > 0.0;
    }
    CHECK(ok == 10000);
  }

  TEST_CASE("inverse-scale form has mean dof * inv_scale^-1") {
    Rng r(44);
    Matrix inv(2, 2);
    inv << 4, 1, 1, 2;
    const SpdMatrix s(inv);
    Matrix sum = Matrix::Zero(2, 2);
    for (int i = 0; i < 100000; ++i) sum += sample_wishart_inverse_scale(r, 6.0, s).matrix();
    const Matrix expect = 6.0 * inv.inverse();
    CHECK(((sum / 1e5) - expect).cwiseAbs().maxCoeff() < 0.02 * expect.cwiseAbs().maxCoeff());
  }
}
