#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../fixtures.hpp"
#include "../oracles.hpp"
#include "inference.hpp"

using namespace bshrink;
using namespace bshrink::inference;
using model::Phi;
using stat::Rng;
using stat::SpdMatrix;

namespace {

Phi point(const Vector& beta, double beta0 = 0.0, double sigma2 = 1.0) {
  const Eigen::Index p = beta.size();
  return Phi{beta0, beta, sigma2, model::MeParams::scalar(0.0, 1.0, 1.0), Vector::Zero(p),
             SpdMatrix::identity(p)};
}

ChainOutput chain_of(std::vector<Phi> draws) {
  ChainOutput c;
  c.method = sampler::Method::Vanilla;
  c.draws = std::move(draws);
  return c;
}

ChainOutput random_chain(Rng& rng, Eigen::Index p, size_t t) {
  std::vector<Phi> draws;
  for (size_t i = 0; i < t; ++i) draws.push_back(fixture::random_phi(rng, p));
  return chain_of(std::move(draws));
}

}  // namespace

TEST_SUITE("point estimates") {
  TEST_CASE("identical weights reduce the weighted mean to the plain mean") {
    Rng rng(200);
    ChainOutput c = random_chain(rng, 3, 12);
    const Phi first = c.draws.front();
    for (Phi& d : c.draws) {
      d.mu_x = first.mu_x;
      d.sigma_x_inv = first.sigma_x_inv;
    }
    CHECK((beta_ppm(c) - beta_pm(c)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("a single draw is its own estimate") {
    Rng rng(201);
    const ChainOutput c = random_chain(rng, 4, 1);
    CHECK((beta_ppm(c) - c.draws[0].beta).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(beta_pm(c) == c.draws[0].beta);
    CHECK(beta0_hat(c) == c.draws[0].beta0);
  }

  TEST_CASE("p = 2 hand case and scale invariance") {
    Matrix m1(2, 2), m2(2, 2);
    m1 << 2, 0, 0, 1;
    m2 << 1, 0, 0, 3;
    Vector b1(2), b2(2);
    b1 << 1, 0;
    b2 << 0, 1;
    std::vector<Matrix> w = {m1, m2};
    std::vector<Vector> b = {b1, b2};
    const Vector got = beta_ppm_weighted(w, b);
    CHECK(got[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(got[1] == doctest::Approx(0.75).epsilon(1e-15));
    for (Matrix& m : w) m *= 37.5;
    CHECK((beta_ppm_weighted(w, b) - got).cwiseAbs().maxCoeff() < 1e-14);
    std::vector<Vector> short_b = {b1};
    CHECK_THROWS_AS(beta_ppm_weighted(w, short_b), Error);
  }

  TEST_CASE("chain weights are Sigma_x plus mu_x mu_x^T") {
    Rng rng(202);
    const ChainOutput c = random_chain(rng, 3, 25);
    Matrix total = Matrix::Zero(3, 3);
    Vector rhs = Vector::Zero(3);
    Vector plain = Vector::Zero(3);
    double b0 = 0.0;
    for (const Phi& d : c.draws) {
      const Matrix m = d.sigma_x_inv.matrix().inverse() + d.mu_x * d.mu_x.transpose();
      total += m;
      rhs += m * d.beta;
      plain += d.beta;
      b0 += d.beta0;
    }
    const Vector expect = total.fullPivLu().solve(rhs);
    CHECK((beta_ppm(c) - expect).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((beta_pm(c) - plain / 25.0).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(beta0_hat(c) == doctest::Approx(b0 / 25.0).epsilon(1e-14));
    const PosteriorSummary s = summarize(c);
    CHECK(s.beta_ppm == beta_ppm(c));
    CHECK(s.p_lo == 0.025);
  }

  TEST_CASE("empty chains and bad levels are rejected") {
    CHECK_THROWS_AS(beta_pm(chain_of({})), Error);
    Rng rng(203);
    const ChainOutput c = random_chain(rng, 2, 3);
    CHECK_THROWS_AS(summarize(c, 0.5, 0.4), Error);
    CHECK_THROWS_AS(summarize(c, 0.0, 0.9), Error);
  }
}

TEST_SUITE("predictive draws") {
  TEST_CASE("fixed parameters: mean and noise scale") {
    Vector beta(2);
    beta << 1.0, -2.0;
    const ChainOutput c = chain_of(std::vector<Phi>(100000, point(beta, 0.5, 2.25)));
    Vector x(2);
    x << 0.4, 0.1;
    Rng rng(210);
    const std::vector<double> sd = predictive_draws(rng, c, x);
    CHECK(oracle::mean(sd) == doctest::Approx(0.5 + 0.4 - 0.2).epsilon(0.01));
    CHECK(oracle::variance(sd) == doctest::Approx(2.25).epsilon(0.02));
    const std::vector<double> var = predictive_draws(rng, c, x, NoiseScale::Variance);
    CHECK(oracle::variance(var) == doctest::Approx(2.25 * 2.25).epsilon(0.02));
  }

  TEST_CASE("variance decomposes into parameter spread plus mean noise") {
    Rng rng(211);
    std::vector<Phi> draws;
    for (int i = 0; i < 100000; ++i) draws.push_back(point(fixture::normal_vector(rng, 2, 0.5), 0.0, 0.5 + rng.uniform()));
    const ChainOutput c = chain_of(draws);
    Vector x(2);
    x << 1.0, 2.0;
    // var(x'beta) = 0.25 (1 + 4); E sigma2 = 1.
    const std::vector<double> y = predictive_draws(rng, c, x);
    CHECK(oracle::variance(y) == doctest::Approx(1.25 + 1.0).epsilon(0.02));
  }

  TEST_CASE("x_new = 0 leaves intercept plus noise") {
    Rng rng(212);
    const ChainOutput c = random_chain(rng, 3, 10);
    Rng a(5), b(5);
    const std::vector<double> y = predictive_draws(a, c, Vector::Zero(3));
    for (size_t i = 0; i < y.size(); ++i)
      CHECK(y[i] == doctest::Approx(c.draws[i].beta0 + std::sqrt(c.draws[i].sigma2) * b.normal()).epsilon(1e-14));
    CHECK_THROWS_AS(predictive_draws(a, c, Vector::Zero(2)), Error);
  }
}

TEST_SUITE("quantiles and intervals") {
  TEST_CASE("1..100 at the default levels") {
    std::vector<double> xs(100);
    std::iota(xs.begin(), xs.end(), 1.0);
    CHECK(empirical_quantile(xs, 0.025) == doctest::Approx(3.475).epsilon(1e-14));
    CHECK(empirical_quantile(xs, 0.975) == doctest::Approx(97.525).epsilon(1e-14));
    CHECK(empirical_quantile(xs, 0.0) == 1.0);
    CHECK(empirical_quantile(xs, 1.0) == 100.0);
    std::vector<double> shuffled(xs.rbegin(), xs.rend());
    const Interval iv = prediction_interval(shuffled);
    CHECK(iv.lo == doctest::Approx(3.475));
    CHECK(iv.width() == doctest::Approx(94.05));
  }

  TEST_CASE("agrees with the order-statistic definition and is monotone") {
    Rng rng(220);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> xs(1 + t * 7);
      for (double& x : xs) x = rng.normal();
      std::vector<double> sorted = xs;
      std::sort(sorted.begin(), sorted.end());
      double prev = -INFINITY;
      for (double q = 0.0; q <= 1.0; q += 0.01) {
        const double v = empirical_quantile(sorted, q);
        CHECK(v == doctest::Approx(oracle::quantile_type7(xs, q)).epsilon(1e-13));
        CHECK(v >= prev);
        prev = v;
      }
    }
  }

  TEST_CASE("bad inputs") {
    std::vector<double> none;
    CHECK_THROWS_AS(empirical_quantile(none, 0.5), Error);
    std::vector<double> one = {2.0};
    CHECK(empirical_quantile(one, 0.3) == 2.0);
    CHECK_THROWS_AS(empirical_quantile(one, 1.5), Error);
    CHECK_THROWS_AS(prediction_interval(one, 0.9, 0.1), Error);
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("mspe") {
    Matrix x(3, 2);
    x << 1, 0, 0, 1, 1, 1;
    Vector beta(2);
    beta << 2, 3;
    const Vector y = (x * beta).array() + 1.0;
    CHECK(mspe(1.0, beta, y, x) == 0.0);
    // Residuals 1, -1, 2 when beta0 is off by one and y(2) is shifted.
    Vector y2 = y;
    y2[1] -= 2.0;
    y2[2] += 1.0;
    CHECK(mspe(0.0, beta, y2, x) == doctest::Approx((1.0 + 1.0 + 4.0) / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(mspe(0.0, beta, y.head(2), x), Error);
  }

  TEST_CASE("coverage counts closed intervals") {
    const std::vector<Interval> iv = {{0, 1}, {0, 1}, {0, 1}, {0, 1}};
    const std::vector<double> y = {0.0, 1.0, 1.5, -0.1};
    CHECK(coverage(iv, y) == 0.5);
    CHECK_THROWS_AS(coverage(iv, std::vector<double>{0.5}), Error);
  }

  TEST_CASE("intervals from the generating law cover at the nominal rate") {
    Rng rng(230);
    Vector beta(3);
    beta << 0.5, -1.0, 0.25;
    const ChainOutput c = chain_of(std::vector<Phi>(1000, point(beta, 0.3, 1.5)));
    std::vector<Interval> iv;
    std::vector<double> y;
    for (int i = 0; i < 2000; ++i) {
      const Vector x = fixture::normal_vector(rng, 3);
      y.push_back(0.3 + x.dot(beta) + std::sqrt(1.5) * rng.normal());
      iv.push_back(prediction_interval(predictive_draws(rng, c, x)));
    }
    CHECK(std::abs(coverage(iv, y) - 0.95) <= 0.03);
  }
}
