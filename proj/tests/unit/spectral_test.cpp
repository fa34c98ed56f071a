#include "netsde/spectral.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "netsde/riccati.hpp"
#include "netsde/sim.hpp"
#include "oracles/oracles.hpp"

namespace netsde {
namespace {

Matrix random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = normal(rng);
  return m;
}

TEST(Spectral, MeanfieldHasSingleUnitEigenvalue) {
  const NetworkModel m = build_model(meanfield_preset(10));
  const SpectralBasis b = decompose_coupling(m);
  ASSERT_EQ(b.L, 1);
  EXPECT_NEAR(b.lambdas(0), 1.0, 1e-12);
  EXPECT_LT((b.V.col(0) - Vector::Constant(10, 1 / std::sqrt(10.0))).norm(), 1e-12);
  EXPECT_EQ(b.i_star[0], 0);
  EXPECT_NEAR(b.q_ell(0), 0.15, 1e-14);
  EXPECT_NEAR(b.r_ell(0), 0.15, 1e-14);
  EXPECT_NEAR(b.breve_v2.sum(), 9.0, 1e-10);
}

TEST(Spectral, ZeroCouplingIsPureAuxiliary) {
  ModelDescription d = meanfield_preset(6);
  d.M = Matrix::Zero(6, 6);
  const SpectralBasis b = decompose_coupling(build_model(d));
  EXPECT_EQ(b.L, 0);
  EXPECT_EQ(b.breve_v2, Vector::Ones(6));
}

TEST(Spectral, LowrankEigenvaluesArePlusMinusRho) {
  for (int n_rep : {1, 10}) {
    const NetworkModel m = build_model(lowrank_preset(5, 5, n_rep));
    const SpectralBasis b = decompose_coupling(m);
    ASSERT_EQ(b.L, 2);
    EXPECT_NEAR(b.lambdas(0), 10.0, 1e-10);
    EXPECT_NEAR(b.lambdas(1), -10.0, 1e-10);
    EXPECT_NEAR(b.q_ell(0), 81.0, 1e-8);
    EXPECT_NEAR(b.q_ell(1), 121.0, 1e-8);
  }
  // a != b: rho = sqrt(2 (a^2 + b^2)).
  const SpectralBasis b = decompose_coupling(build_model(lowrank_preset(0.3, 0.4, 2)));
  ASSERT_EQ(b.L, 2);
  EXPECT_NEAR(b.lambdas(0), std::sqrt(2 * (0.09 + 0.16)), 1e-12);
}

TEST(Spectral, SingleNodeViolatesA5) {
  ModelDescription d = meanfield_preset(1);
  d.q_coeffs = {1, 1};
  const NetworkModel m = build_model(d);
  try {
    decompose_coupling(m);
    FAIL() << "expected A5 failure";
  } catch (const AssumptionError& e) {
    EXPECT_EQ(e.assumption(), "A5");
  }
  const SpectralBasis relaxed = decompose_coupling(m, kDefaultRankTol, AuxDegeneracy::kAllow);
  EXPECT_NEAR(relaxed.q_ell(0), 2.0, 1e-14);
  EXPECT_FALSE(relaxed.aux_active(0));
}

TEST(Spectral, A3Violations) {
  ModelDescription d = meanfield_preset(4);
  d.M = Matrix::Zero(4, 4);
  d.q_coeffs = {0.0};
  EXPECT_THROW(decompose_coupling(build_model(d)), AssumptionError);

  // q(lambda) = 1 - lambda vanishes at lambda = 1.
  d = meanfield_preset(4);
  d.q_coeffs = {1.0, -1.0};
  try {
    decompose_coupling(build_model(d));
    FAIL();
  } catch (const AssumptionError& e) {
    EXPECT_EQ(e.assumption(), "A3");
  }
}

TEST(Spectral, BasisInvariantsOnRandomModels) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkModel m = build_model(oracle::random_model(rng));
    const SpectralBasis b = decompose_coupling(m);
    EXPECT_LT((b.V.transpose() * b.V - Matrix::Identity(b.L, b.L)).norm(), 1e-10);
    const Matrix rebuilt = b.V * b.lambdas.asDiagonal() * b.V.transpose();
    EXPECT_LT((rebuilt - m.M).norm(), 1e-9 * (1 + m.M.norm()));
    EXPECT_NEAR(b.breve_v2.sum(), m.n - b.L, 1e-8);
    EXPECT_GE(b.breve_v2.minCoeff(), 0.0);
    EXPECT_LE(b.breve_v2.maxCoeff(), 1.0);
    for (int l = 0; l < b.L; ++l) {
      Eigen::Index arg;
      b.V.col(l).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(b.V(arg, l), 0.0);
      EXPECT_EQ(b.i_star[l], arg);
    }
  }
}

TEST(Spectral, ProjectionReconstructsAndIsOrthogonal) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkModel m = build_model(oracle::random_model(rng));
    const SpectralBasis b = decompose_coupling(m);
    const Matrix x = random_matrix(m.dx, m.n, rng);
    const Projection p = project_state(b, x);
    Matrix sum = p.aux;
    for (const auto& xl : p.eigen) sum += xl;
    EXPECT_LT((sum - x).cwiseAbs().maxCoeff(), 1e-12);
    for (int l = 0; l < b.L; ++l) {
      for (int k = l + 1; k < b.L; ++k) {
        EXPECT_LT(std::abs((p.eigen[l].transpose() * p.eigen[k]).trace()), 1e-9);
      }
    }
  }
}

TEST(Spectral, ProjectionSimpleCases) {
  const NetworkModel mf = build_model(meanfield_preset(5));
  const SpectralBasis b = decompose_coupling(mf);
  const Matrix x = Matrix::Constant(1, 5, 2.5);
  const Projection p = project_state(b, x);
  EXPECT_LT((p.eigen[0] - x).norm(), 1e-14);
  EXPECT_LT(p.aux.norm(), 1e-14);

  ModelDescription d = meanfield_preset(3);
  d.M = Matrix::Zero(3, 3);
  const SpectralBasis empty = decompose_coupling(build_model(d));
  std::mt19937_64 rng(1);
  const Matrix y = random_matrix(1, 3, rng);
  EXPECT_EQ(project_state(empty, y).aux, y);
}

TEST(Spectral, DecomposedCostZeroAtOrigin) {
  const NetworkModel m = build_model(lowrank_preset(0.3, 0.2, 2));
  const SpectralBasis b = decompose_coupling(m);
  const DecomposedCost c = decomposed_cost(b, m, Matrix::Zero(1, 8), Matrix::Zero(1, 8));
  EXPECT_EQ(c.aux, Vector::Zero(8));
  EXPECT_EQ(c.eigen, Matrix::Zero(2, 8));
}

TEST(Spectral, ProjectedNoiseVariances) {
  // 1e5 draws; variances within 5% of V(i,l)^2 sigma^2 and breve_v2 sigma^2.
  const NetworkModel m = build_model(lowrank_preset(0.3, 0.7, 2));
  const SpectralBasis b = decompose_coupling(m);
  std::mt19937_64 rng(99);
  constexpr int kDraws = 100000;
  Matrix eig_ss = Matrix::Zero(b.L, m.n);
  Vector aux_ss = Vector::Zero(m.n);
  for (int k = 0; k < kDraws; ++k) {
    const Projection p = project_state(b, draw_noise(m.dx, m.n, m.sigma_w2, rng));
    for (int l = 0; l < b.L; ++l) eig_ss.row(l) += p.eigen[l].cwiseAbs2();
    aux_ss += p.aux.cwiseAbs2().transpose();
  }
  for (int i = 0; i < m.n; ++i) {
    const double aux_expected = aux_noise_variance(b, m, i);
    EXPECT_NEAR(aux_ss(i) / kDraws, aux_expected, 0.05 * aux_expected);
    for (int l = 0; l < b.L; ++l) {
      const double expected = eigen_noise_variance(b, m, l, i);
      EXPECT_NEAR(eig_ss(l, i) / kDraws, expected, 0.05 * expected);
    }
  }
}

TEST(Spectral, GlobalDynamicsDecouple) {
  // Simulating the network and projecting equals simulating each block with
  // projected controls and noise.
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkModel m = build_model(oracle::random_model(rng));
    const SpectralBasis b = decompose_coupling(m);
    const TrueBlocks tb = true_blocks(m, b);
    Matrix x = random_matrix(m.dx, m.n, rng);
    Projection blocks = project_state(b, x);
    for (int t = 0; t < 100; ++t) {
      const Matrix u = random_matrix(m.du, m.n, rng);
      const Matrix w = random_matrix(m.dx, m.n, rng);
      x = simulate_step(m, x, u, w);
      const Projection pu = project_state(b, u);
      const Projection pw = project_state(b, w);
      blocks.aux = tb.aux.A * blocks.aux + tb.aux.B * pu.aux + pw.aux;
      for (int l = 0; l < b.L; ++l) {
        blocks.eigen[l] =
            tb.eigen[l].A * blocks.eigen[l] + tb.eigen[l].B * pu.eigen[l] + pw.eigen[l];
      }
    }
    const Projection px = project_state(b, x);
    EXPECT_LT((px.aux - blocks.aux).cwiseAbs().maxCoeff(), 1e-8);
    for (int l = 0; l < b.L; ++l) {
      EXPECT_LT((px.eigen[l] - blocks.eigen[l]).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

}  // namespace
}  // namespace netsde
