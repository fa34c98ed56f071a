#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's solvers.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "netsde/netmodel.hpp"

namespace netsde::oracle {

/// Positive root of b^2 S^2 + (r - a^2 r - q b^2) S - q r = 0, the scalar
/// Riccati equation S = a^2 S - a^2 b^2 S^2 / (r + b^2 S) + q.
inline double scalar_dare(double a, double b, double q, double r) {
  if (b == 0.0) return q / (1.0 - a * a);
  const double qa = b * b;
  const double qb = r - a * a * r - q * b * b;
  const double qc = -q * r;
  return (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
}

inline double scalar_gain(double a, double b, double q, double r) {
  const double s = scalar_dare(a, b, q, r);
  return -(b * s * a) / (r + b * b * s);
}

/// Solution of S = A'SA + Q via vec(S) = (I - A'⊗A')^{-1} vec(Q).
inline Eigen::MatrixXd lyapunov(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& Q) {
  const auto n = A.rows();
  Eigen::MatrixXd K(n * n, n * n);
  const Eigen::MatrixXd At = A.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) = At(i, j) * At;
    }
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n * n, n * n);
  Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  Eigen::VectorXd s = (I - K).fullPivLu().solve(q);
  return Eigen::Map<Eigen::MatrixXd>(s.data(), n, n);
}

/// Batch Gaussian linear-regression posterior from explicit precision
/// accumulation: P = P0 + sum z z'/s2, mu = P^{-1}(P0 mu0 + sum z x'/s2).
struct BatchPosterior {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd Sigma;
};

inline BatchPosterior batch_posterior(const Eigen::MatrixXd& mu0,
                                      const Eigen::MatrixXd& Sigma0,
                                      const std::vector<Eigen::VectorXd>& zs,
                                      const std::vector<Eigen::VectorXd>& xs,
                                      const std::vector<double>& s2) {
  Eigen::MatrixXd P = Sigma0.inverse();
  Eigen::MatrixXd rhs = P * mu0;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    P += zs[k] * zs[k].transpose() / s2[k];
    rhs += zs[k] * xs[k].transpose() / s2[k];
  }
  const Eigen::MatrixXd Sigma = P.inverse();
  return {Sigma * rhs, Sigma};
}

/// Per-step cost by the explicit double sum over agent pairs.
inline double double_sum_cost(const NetworkModel& m, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& u) {
  double c = 0.0;
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      c += m.H_x(i, j) * x.col(i).dot(m.Q * x.col(j)) +
           m.H_u(i, j) * u.col(i).dot(m.R * u.col(j));
    }
  }
  return c;
}

/// Random models satisfying A2, A3 and A5: M = V diag(lambda) V' with
/// L < n orthonormal columns, |lambda| in [0.1, 1], q = [1, c] with |c| <= 0.5.
inline ModelDescription random_model(std::mt19937_64& rng, int max_n = 20,
                                     int max_d = 3) {
  std::uniform_int_distribution<int> n_dist(2, max_n);
  std::uniform_int_distribution<int> d_dist(1, max_d);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = n_dist(rng);
  const int dx = d_dist(rng);
  const int du = d_dist(rng);
  std::uniform_int_distribution<int> l_dist(0, n - 1);
  const int L = l_dist(rng);

  auto gaussian = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = normal(rng);
    return m;
  };
  auto spd = [&](int d) {
    const Eigen::MatrixXd g = gaussian(d, d);
    return Eigen::MatrixXd(g * g.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d));
  };
  auto scaled = [&](int r, int c, double radius) {
    Eigen::MatrixXd m = gaussian(r, c);
    const double norm = m.norm();
    return Eigen::MatrixXd(norm > 0 ? m * (radius / norm) : m);
  };

  ModelDescription d;
  Eigen::MatrixXd V = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(n, n))
                          .householderQ() *
                      Eigen::MatrixXd::Identity(n, L);
  Eigen::VectorXd lambda(L);
  for (int l = 0; l < L; ++l) {
    const double mag = 0.1 + 0.9 * std::abs(unit(rng));
    lambda(l) = unit(rng) < 0 ? -mag : mag;
  }
  d.M = V * lambda.asDiagonal() * V.transpose();
  d.A = scaled(dx, dx, 0.6);
  d.B = scaled(dx, du, 0.8);
  d.D = scaled(dx, dx, 0.3);
  d.E = scaled(dx, du, 0.3);
  d.Q = spd(dx);
  d.R = spd(du);
  d.q_coeffs = {1.0, 0.5 * unit(rng)};
  d.r_coeffs = {1.0 + std::abs(unit(rng)), 0.5 * unit(rng)};
  d.sigma_w2 = 0.5 + std::abs(unit(rng));
  return d;
}

}  // namespace netsde::oracle
