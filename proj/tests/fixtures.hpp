#pragma once

// Small random inputs for the unit tests, built through the library types.

#include "model.hpp"

namespace fixture {

using namespace bshrink;
using model::Dataset;
using model::Phi;
using stat::Rng;
using stat::SpdMatrix;

inline Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline Vector normal_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
  return normal_matrix(rng, n, 1, scale).col(0);
}

inline Matrix random_spd(Rng& rng, Eigen::Index p, double ridge = 0.5) {
  const Matrix a = normal_matrix(rng, p, p);
  return a * a.transpose() / double(p) + ridge * Matrix::Identity(p, p);
}

inline Phi random_phi(Rng& rng, Eigen::Index p, bool per_gene = false) {
  const double tau2 = 0.2 + rng.uniform();
  model::MeParams me =
      per_gene ? model::MeParams::per_gene(normal_vector(rng, p, 0.5),
                                           normal_vector(rng, p, 0.5).array() + 1.0, tau2)
               : model::MeParams::scalar(0.5 * rng.normal(), 1.0 + 0.5 * rng.normal(), tau2);
  return Phi{rng.normal(),         normal_vector(rng, p),
             0.3 + 2.0 * rng.uniform(), std::move(me),
             normal_vector(rng, p), SpdMatrix(random_spd(rng, p))};
}

// Data drawn from the model at phi. Returns the dataset; x_B is written to *xb.
inline Dataset random_dataset(Rng& rng, const Phi& phi, Eigen::Index n_a, Eigen::Index n_b,
                              Matrix* xb = nullptr) {
  const Eigen::Index p = phi.beta.size();
  const Matrix sigma = phi.sigma_x_inv.inverse();
  const SpdMatrix cov = SpdMatrix::symmetrized(sigma);
  auto draw = [&](Eigen::Index rows, Matrix& x, Vector& y, Matrix& w) {
    x.resize(rows, p);
    y.resize(rows);
    w.resize(rows, p);
    for (Eigen::Index i = 0; i < rows; ++i) {
      x.row(i) = stat::sample_mvnormal(rng, phi.mu_x, cov).transpose();
      y[i] = phi.beta0 + x.row(i).dot(phi.beta) + std::sqrt(phi.sigma2) * rng.normal();
      for (Eigen::Index j = 0; j < p; ++j)
        w(i, j) = phi.me.psi_at(j) + phi.me.nu_at(j) * x(i, j) + std::sqrt(phi.me.tau2) * rng.normal();
    }
  };
  Dataset d;
  draw(n_a, d.x_a, d.y_a, d.w_a);
  Matrix x_b;
  draw(n_b, x_b, d.y_b, d.w_b);
  if (xb) *xb = x_b;
  return d;
}

}  // namespace fixture
