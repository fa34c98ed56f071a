#pragma once

#include <vector>

#include "netsde/common.hpp"
#include "netsde/netmodel.hpp"

namespace netsde {

/// How decompose_coupling treats subsystems whose auxiliary noise vanishes
/// (breve_v2[i] == 0, i.e. the auxiliary state of agent i is identically
/// zero).
enum class AuxDegeneracy {
  kReject,  // hard A5 failure
  kAllow,   // those agents are skipped by the auxiliary learner
};

/// Spectral factorization M = sum_l lambda_l v_l v_l' restricted to the
/// non-zero eigenvalues, plus the scalars derived from it.
struct SpectralBasis {
  int n = 0;
  int L = 0;
  Vector lambdas;  // L, sorted descending
  Matrix V;        // n x L, orthonormal columns
  Vector q_ell;    // L
  Vector r_ell;    // L
  double q0 = 0.0;
  double r0 = 0.0;
  Vector breve_v2;          // n, 1 - sum_l V(i,l)^2 clamped to [0,1]
  std::vector<int> i_star;  // L, representative agent per eigen-direction

  /// Ratio r/q weighting the control cost of the auxiliary block.
  double aux_cost_ratio() const { return r0 / q0; }
  double eigen_cost_ratio(int l) const { return r_ell(l) / q_ell(l); }

  /// Whether agent i's auxiliary state carries information (breve_v2 > 0).
  bool aux_active(int i) const;
};

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kAuxDegeneracyTol = 1e-10;
// q_l, r_l must exceed this fraction of sum_k |c_k| |lambda_l|^k.
inline constexpr double kCostPositivityTol = 1e-10;

/// Eigen-decomposes the model's coupling matrix and validates A3 and A5.
/// Eigenvalues with |lambda| <= rank_tol * max(1, ||M||_2) are dropped. Each
/// eigenvector is signed so its largest-magnitude entry is positive, and
/// i_star[l] is the (lowest) index of that entry.
SpectralBasis decompose_coupling(const NetworkModel& m,
                                 double rank_tol = kDefaultRankTol,
                                 AuxDegeneracy aux = AuxDegeneracy::kReject);

/// Eigen components x v_l v_l' and the auxiliary residual of a d x n matrix.
struct Projection {
  std::vector<Matrix> eigen;  // L matrices, d x n
  Matrix aux;                 // d x n
};

/// Splits x (states, controls or noise) into eigen and auxiliary parts.
Projection project_state(const SpectralBasis& basis, const Matrix& x);

/// Per-agent decoupled costs: aux(i) = x̆ᵢ'Qx̆ᵢ + (r0/q0) ŭᵢ'Rŭᵢ and
/// eigen(l,i) = xˡᵢ'Qxˡᵢ + (rˡ/qˡ) uˡᵢ'Ruˡᵢ.
struct DecomposedCost {
  Vector aux;    // n
  Matrix eigen;  // L x n

  /// sum_i [q0 aux(i) + sum_l q_l eigen(l,i)]; equals per_step_cost.
  double weighted_total(const SpectralBasis& basis) const;
};

DecomposedCost decomposed_cost(const SpectralBasis& basis,
                               const NetworkModel& m, const Matrix& x,
                               const Matrix& u);

/// Noise variance of agent i's auxiliary state, breve_v2[i] * sigma_w^2.
double aux_noise_variance(const SpectralBasis& basis, const NetworkModel& m,
                          int i);

/// Noise variance of agent i's l-th eigenstate, V(i,l)^2 * sigma_w^2.
double eigen_noise_variance(const SpectralBasis& basis, const NetworkModel& m,
                            int l, int i);

}  // namespace netsde
