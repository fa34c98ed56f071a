#pragma once

#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "netsde/common.hpp"
#include "netsde/riccati.hpp"

namespace netsde {

using Rng = std::mt19937_64;

/// One transition of a block: x_next = theta' z + noise, noise ~ N(0, sigma2 I).
struct Observation {
  Vector z;       // (dx+du), stacked (x, u)
  Vector x_next;  // dx
  double sigma2 = 1.0;
};

/// Gaussian posterior over the (dx+du) x dx parameter of one block. Each
/// column k of theta is N(mu.col(k), Sigma); all columns share Sigma.
class PosteriorState {
 public:
  /// Sigma must be symmetric positive definite.
  PosteriorState(Matrix mu, Matrix Sigma, BlockTag tag);

  /// Degenerate posterior concentrated on `mu` (Sigma = 0). Updates are
  /// no-ops and sampling returns mu.
  static PosteriorState point_mass(Matrix mu, BlockTag tag);

  const Matrix& mu() const { return mu_; }
  const Matrix& Sigma() const { return Sigma_; }
  /// det(Sigma), maintained incrementally across updates.
  double det() const { return det_; }
  const BlockTag& tag() const { return tag_; }
  long update_count() const { return updates_; }
  int dx() const { return static_cast<int>(mu_.cols()); }
  int dz() const { return static_cast<int>(mu_.rows()); }

  /// Conjugate rank-one update:
  ///   mu    <- mu + Sigma z (x_next - mu' z)' / (sigma2 + z' Sigma z)
  ///   Sigma <- Sigma - (Sigma z)(Sigma z)' / (sigma2 + z' Sigma z)
  void update(const Observation& obs);

  /// Symmetrizes Sigma and re-synchronizes det() with a fresh determinant
  /// when they disagree by more than kDetResyncTol (relative).
  void resync();

  static constexpr long kResyncInterval = 1000;
  static constexpr double kDetResyncTol = 1e-6;

 private:
  PosteriorState() = default;

  Matrix mu_;
  Matrix Sigma_;
  double det_ = 0.0;
  BlockTag tag_;
  long updates_ = 0;
};

/// Functional form of PosteriorState::update.
PosteriorState posterior_update(PosteriorState p, const Observation& obs);

/// Compact parameter set Theta = { theta : rho(A_ref + B_ref G(theta)) <= delta },
/// where G(theta) is the optimal gain of the sampled block under control
/// weight cost_ratio * R. The closed loop is the sampled block's own
/// (A_ref, B_ref = theta) unless a nominal block is given.
struct UncertaintySet {
  double delta = 0.99;
  double lambda = 0.0;  // eigenvalue of the block (0 for aux)
  double cost_ratio = 1.0;
  Matrix Q;
  Matrix R;
  std::optional<ThetaBlock> nominal;
  DareOptions dare;
};

bool in_set(const ThetaBlock& theta, const UncertaintySet& set);

struct TruncatedSample {
  ThetaBlock theta;
  bool accepted = false;  // false: fallback returned after max_rejects
  int rejections = 0;
};

/// Rejection sampler for the posterior restricted to `set`. Returns
/// `fallback` after `max_rejects` consecutive rejections.
TruncatedSample sample_truncated(const PosteriorState& p,
                                 const UncertaintySet& set, Rng& rng,
                                 int max_rejects, const ThetaBlock& fallback);

/// Unrestricted draw from the posterior.
ThetaBlock sample_posterior(const PosteriorState& p, Rng& rng);

/// argmax_i z_i' Sigma z_i / sigma2_i over agents with sigma2_i > 0, ties to
/// the lowest index. `z_all` holds one regressor per column. Returns -1 when
/// no agent has positive variance.
int select_agent(const PosteriorState& p_aux, const Matrix& z_all,
                 const Vector& sigma2_all);

nlohmann::json to_json(const PosteriorState& p);

}  // namespace netsde
