#pragma once

#include <string>
#include <vector>

#include "netsde/common.hpp"
#include "netsde/netmodel.hpp"
#include "netsde/spectral.hpp"

namespace netsde {

/// Which decoupled block a parameter or posterior belongs to.
struct BlockTag {
  enum class Kind { kAux, kEigen };
  Kind kind = Kind::kAux;
  int index = 0;  // eigen-direction l; unused for kAux

  static BlockTag aux() { return {Kind::kAux, 0}; }
  static BlockTag eigen(int l) { return {Kind::kEigen, l}; }
  bool is_aux() const { return kind == Kind::kAux; }
  std::string name() const;
  bool operator==(const BlockTag&) const = default;
};

/// Dynamics of one decoupled block, x+ = Ahat x + Bhat u + noise.
/// The stacked parameter theta = [Ahat'; Bhat'] is (dx+du) x dx.
struct ThetaBlock {
  Matrix A;  // dx x dx
  Matrix B;  // dx x du
  BlockTag tag;

  static ThetaBlock zero(int dx, int du, BlockTag tag);
  static ThetaBlock from_theta(const Matrix& theta, int dx, BlockTag tag);
  Matrix theta() const;
  int dx() const { return static_cast<int>(A.rows()); }
  int du() const { return static_cast<int>(B.cols()); }
};

struct DareOptions {
  double tolerance = 1e-12;
  long max_iterations = 1'000'000;
};

/// Stabilizing solution of S = A'SA - A'SB(R + B'SB)^{-1}B'SA + Q by value
/// iteration from S = Q. Stops once the Frobenius change falls below
/// tolerance * (1 + ||S||_F). Throws NumericError when the iteration diverges
/// or hits max_iterations, which for Q > 0 means (A, B) is not stabilizable.
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R, const DareOptions& opts = {});

/// ||S - rhs(S)||_F for the equation above.
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                     const Matrix& R, const Matrix& S);

/// -(R + B'SB)^{-1} B'SA.
Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& R,
                const Matrix& S);

/// Largest eigenvalue magnitude of a square matrix.
double spectral_radius(const Matrix& m);

struct BlockSolution {
  Matrix S;
  Matrix G;
};

/// DARE solution and gain of one block with control weight cost_ratio * R.
/// Throws NumericError when the solver fails or the closed loop is unstable.
BlockSolution solve_block(const ThetaBlock& theta, const Matrix& Q,
                          const Matrix& R, double cost_ratio,
                          const DareOptions& opts = {});

/// Riccati solutions and gains of the auxiliary and every eigen block.
struct GainSet {
  Matrix S_aux;
  Matrix G_aux;
  std::vector<Matrix> S_eigen;
  std::vector<Matrix> G_eigen;
};

GainSet gains_for(const ThetaBlock& theta_aux,
                  const std::vector<ThetaBlock>& thetas_eigen,
                  const SpectralBasis& basis, const NetworkModel& m,
                  const DareOptions& opts = {});

/// Block parameters implied by the model: (A, B) for the auxiliary block and
/// (A + lambda_l D, B + lambda_l E) for eigen block l.
struct TrueBlocks {
  ThetaBlock aux;
  std::vector<ThetaBlock> eigen;
};
TrueBlocks true_blocks(const NetworkModel& m, const SpectralBasis& basis);

/// u^i = G_aux x̆^i + sum_l G_l x^{l,i} from an already projected state.
Matrix synthesize_control(const Matrix& G_aux,
                          const std::vector<Matrix>& G_eigen,
                          const Projection& px);

/// Known-model optimal control for global state x (dx x n).
Matrix optimal_policy_step(const GainSet& gains, const SpectralBasis& basis,
                           const Matrix& x);

/// Optimal long-run average cost
///   J = sum_i q0 breve_v2[i] sigma^2 tr(S_aux)
///     + sum_i sum_l q_l V(i,l)^2 sigma^2 tr(S_l).
double optimal_average_cost(const GainSet& gains, const SpectralBasis& basis,
                            const NetworkModel& m);

}  // namespace netsde
