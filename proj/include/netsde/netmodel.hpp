#pragma once

#include <string>
#include <utility>
#include <vector>

#include "netsde/common.hpp"

namespace netsde {

/// Raw, unvalidated description of a networked LQG system. Everything a
/// config file or preset can set.
struct ModelDescription {
  Matrix M;  // n x n coupling
  Matrix A, B, D, E;
  Matrix Q, R;
  std::vector<double> q_coeffs{1.0};
  std::vector<double> r_coeffs{1.0};
  double sigma_w2 = 1.0;
  Matrix Xi1;  // empty means zero initial covariance
};

/// A validated networked system: n identical subsystems with dynamics
///   x_{t+1} = A x_t + B u_t + D x_t M + E u_t M + w_t
/// and cost weights H_x = sum_k q_k M^k, H_u = sum_k r_k M^k.
///
/// Immutable after build_model(); safe to share between trajectory workers.
struct NetworkModel {
  int n = 0;
  int dx = 0;
  int du = 0;
  Matrix M;
  Matrix A, B, D, E;
  Matrix Q, R;
  std::vector<double> q_coeffs;
  std::vector<double> r_coeffs;
  double sigma_w2 = 0.0;
  Matrix Xi1;  // dx x dx

  // Cached cost weights.
  Matrix H_x;
  Matrix H_u;

  // Non-fatal issues found while building (e.g. M was noticeably asymmetric).
  std::vector<std::string> warnings;
};

/// Validates `desc` and returns the model. M is symmetrized as (M + M^T)/2.
/// Throws ConfigError on shape problems or a negative noise variance and
/// AssumptionError("A2") when Q or R is not symmetric positive definite.
NetworkModel build_model(ModelDescription desc);

/// Scalar mean-field system: M = ones(n,n)/n, A=1, B=0.3, D=0.5, E=0.2,
/// Q=R=1, q = r = [1/n, kappa/n], sigma_w^2 = 1.
ModelDescription meanfield_preset(int n, double kappa = 0.5);

/// Scalar system on the 4-node graph (edges 1-2, 2-3 weight a; 3-4, 4-1
/// weight b) tensored with the complete graph on n_rep nodes with edge
/// weight 1/n_rep. q = [1, -2, 1], r = [1].
ModelDescription lowrank_preset(double a, double b, int n_rep);

/// The 4x4 adjacency matrix of the base graph used by lowrank_preset.
Matrix lowrank_base_graph(double a, double b);

/// Evaluates sum_k c_k M^k with M^0 = I.
Matrix matrix_polynomial(const Matrix& M, const std::vector<double>& coeffs);

/// (H_x, H_u) for the model's cost polynomials.
std::pair<Matrix, Matrix> cost_weight_matrices(const NetworkModel& m);

/// Per-step network cost sum_ij [h_x^ij x_i' Q x_j + h_u^ij u_i' R u_j],
/// evaluated as trace(Q x H_x x') + trace(R u H_u u').
double per_step_cost(const NetworkModel& m, const Matrix& x, const Matrix& u);

}  // namespace netsde
