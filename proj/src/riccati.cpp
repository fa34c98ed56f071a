#include "netsde/riccati.hpp"

#include <cmath>
#include <sstream>

namespace netsde {
namespace {

// Beyond this the iteration has clearly left any stabilizing solution.
constexpr double kDivergenceNorm = 1e150;

Matrix dare_rhs(const Matrix& A, const Matrix& B, const Matrix& Q,
                const Matrix& R, const Matrix& S) {
  const Matrix SA = S * A;
  const Matrix BtSA = B.transpose() * SA;
  const Matrix gram = R + B.transpose() * S * B;
  Matrix next = A.transpose() * SA -
                BtSA.transpose() * gram.ldlt().solve(BtSA) + Q;
  return 0.5 * (next + next.transpose());
}

}  // namespace

std::string BlockTag::name() const {
  return is_aux() ? std::string("aux") : "eigen" + std::to_string(index);
}

ThetaBlock ThetaBlock::zero(int dx, int du, BlockTag tag) {
  return {Matrix::Zero(dx, dx), Matrix::Zero(dx, du), tag};
}

ThetaBlock ThetaBlock::from_theta(const Matrix& theta, int dx, BlockTag tag) {
  const auto du = theta.rows() - dx;
  return {theta.topRows(dx).transpose(), theta.bottomRows(du).transpose(), tag};
}

Matrix ThetaBlock::theta() const {
  Matrix t(A.cols() + B.cols(), A.rows());
  t.topRows(A.cols()) = A.transpose();
  t.bottomRows(B.cols()) = B.transpose();
  return t;
}

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R, const DareOptions& opts) {
  const auto dx = A.rows();
  if (A.cols() != dx || B.rows() != dx || Q.rows() != dx || Q.cols() != dx ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw NumericError("solve_dare: inconsistent dimensions");
  }
  Matrix S = Q;
  for (long it = 0; it < opts.max_iterations; ++it) {
    Matrix next = dare_rhs(A, B, Q, R, S);
    const double step = (next - S).norm();
    const double scale = next.norm();
    if (!next.allFinite() || scale > kDivergenceNorm) {
      std::ostringstream os;
      os << "Riccati iteration diverged after " << it + 1
         << " steps (pair likely not stabilizable)";
      throw NumericError(os.str());
    }
    S = std::move(next);
    if (step <= opts.tolerance * (1.0 + scale)) return S;
  }
  std::ostringstream os;
  os << "Riccati iteration did not converge in " << opts.max_iterations
     << " steps";
  throw NumericError(os.str());
}

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                     const Matrix& R, const Matrix& S) {
  return (S - dare_rhs(A, B, Q, R, S)).norm();
}

Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& R,
                const Matrix& S) {
  const Matrix gram = R + B.transpose() * S * B;
  return -gram.ldlt().solve(B.transpose() * S * A);
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.size() == 1) return std::abs(m(0, 0));
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

BlockSolution solve_block(const ThetaBlock& theta, const Matrix& Q,
                          const Matrix& R, double cost_ratio,
                          const DareOptions& opts) {
  const Matrix R_eff = cost_ratio * R;
  BlockSolution sol;
  sol.S = solve_dare(theta.A, theta.B, Q, R_eff, opts);
  sol.G = lqr_gain(theta.A, theta.B, R_eff, sol.S);
  const double rho = spectral_radius(theta.A + theta.B * sol.G);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "closed loop not stable (spectral radius " << rho << ")";
    throw NumericError(os.str());
  }
  return sol;
}

GainSet gains_for(const ThetaBlock& theta_aux,
                  const std::vector<ThetaBlock>& thetas_eigen,
                  const SpectralBasis& basis, const NetworkModel& m,
                  const DareOptions& opts) {
  auto tagged = [](const ThetaBlock& block, auto&& solve) {
    try {
      return solve();
    } catch (const NumericError& e) {
      throw NumericError(block.tag.name() + " block: " + e.what());
    }
  };
  GainSet g;
  const BlockSolution aux = tagged(theta_aux, [&] {
    return solve_block(theta_aux, m.Q, m.R, basis.aux_cost_ratio(), opts);
  });
  g.S_aux = aux.S;
  g.G_aux = aux.G;
  for (int l = 0; l < basis.L; ++l) {
    const ThetaBlock& block = thetas_eigen.at(l);
    const BlockSolution sol = tagged(block, [&] {
      return solve_block(block, m.Q, m.R, basis.eigen_cost_ratio(l), opts);
    });
    g.S_eigen.push_back(sol.S);
    g.G_eigen.push_back(sol.G);
  }
  return g;
}

TrueBlocks true_blocks(const NetworkModel& m, const SpectralBasis& basis) {
  TrueBlocks tb{{m.A, m.B, BlockTag::aux()}, {}};
  for (int l = 0; l < basis.L; ++l) {
    const double lambda = basis.lambdas(l);
    tb.eigen.push_back(
        {m.A + lambda * m.D, m.B + lambda * m.E, BlockTag::eigen(l)});
  }
  return tb;
}

Matrix synthesize_control(const Matrix& G_aux,
                          const std::vector<Matrix>& G_eigen,
                          const Projection& px) {
  Matrix u = G_aux * px.aux;
  for (std::size_t l = 0; l < px.eigen.size(); ++l) {
    u.noalias() += G_eigen[l] * px.eigen[l];
  }
  return u;
}

Matrix optimal_policy_step(const GainSet& gains, const SpectralBasis& basis,
                           const Matrix& x) {
  return synthesize_control(gains.G_aux, gains.G_eigen,
                            project_state(basis, x));
}

double optimal_average_cost(const GainSet& gains, const SpectralBasis& basis,
                            const NetworkModel& m) {
  double J = basis.q0 * basis.breve_v2.sum() * m.sigma_w2 * gains.S_aux.trace();
  for (int l = 0; l < basis.L; ++l) {
    J += basis.q_ell(l) * basis.V.col(l).squaredNorm() * m.sigma_w2 *
         gains.S_eigen[l].trace();
  }
  return J;
}

}  // namespace netsde
