#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "netsde/bayes.hpp"
#include "netsde/netmodel.hpp"
#include "netsde/riccati.hpp"
#include "netsde/spectral.hpp"
#include "netsde/tsde.hpp"

namespace netsde {

/// x_{t+1} = A x + B u + D x M + E u M + w with w drawn i.i.d. N(0, sigma_w^2 I)
/// per column.
Matrix simulate_step(const NetworkModel& m, const Matrix& x, const Matrix& u,
                     Rng& rng);

/// Same dynamics with an explicit noise matrix.
Matrix simulate_step(const NetworkModel& m, const Matrix& x, const Matrix& u,
                     const Matrix& w);

/// Dynamics written through the decoupled blocks:
///   x_{t+1} = A_aux x̆ + B_aux ŭ + sum_l (A_l x^l + B_l u^l) + w.
/// Coincides with the global form when the blocks come from true_blocks().
Matrix simulate_step_blocks(const SpectralBasis& basis, const TrueBlocks& truth,
                            const Matrix& x, const Matrix& u, const Matrix& w);

/// dx x n matrix of N(0, sigma2) entries, filled column by column.
Matrix draw_noise(int dx, int n, double sigma2, Rng& rng);

/// Validated model with its decomposition and known-model optimum.
struct PreparedSystem {
  NetworkModel model;
  SpectralBasis basis;
  TrueBlocks truth;
  GainSet oracle_gains;
  double J = 0.0;
};

PreparedSystem prepare_system(const ModelDescription& desc,
                              double rank_tol = kDefaultRankTol,
                              AuxDegeneracy aux = AuxDegeneracy::kReject);

struct GaussianPrior {
  Matrix mean;  // (dx+du) x dx
  Matrix cov;   // (dx+du) x (dx+du)
};

enum class Membership {
  kSelf,     // rho(A_theta + B_theta G(theta)) <= delta
  kNominal,  // rho(A_true + B_true G(theta)) <= delta
};

enum class PolicyKind { kNetTsde, kOracle };

/// Everything the learner needs besides the model.
struct LearnerSpec {
  PolicyKind policy = PolicyKind::kNetTsde;
  GaussianPrior aux_prior;
  std::vector<GaussianPrior> eigen_priors;  // one entry reused for every l
  bool point_mass_prior = false;            // prior = delta at the truth
  double delta = 0.99;
  Membership membership = Membership::kSelf;
  ActorConfig actor;
};

/// Uncertainty set of one block under `spec`.
UncertaintySet make_uncertainty_set(const PreparedSystem& sys,
                                    const LearnerSpec& spec, BlockTag tag,
                                    const TrueBlocks& truth);

/// The learner for one trajectory.
NetTsde make_learner(const PreparedSystem& sys, const LearnerSpec& spec,
                     const TrueBlocks& truth);

enum class ThetaMode {
  kFixed,  // the model's (A, B, D, E)
  kBayes,  // block parameters drawn from the truncated priors per trajectory
};

inline constexpr double kBlowUpNorm = 1e12;

struct TrajectoryResult {
  std::uint64_t seed = 0;
  double J = 0.0;                        // oracle average cost of the truth
  std::vector<double> cumulative_cost;   // index t-1 holds sum_{s<=t} c_s
  std::vector<double> regret;            // cumulative_cost[t-1] - t J
  std::vector<int> episodes_aux;         // K_t of the auxiliary actor
  std::vector<double> episodes_eigen;    // K_t averaged over eigen actors
  std::vector<EpisodeRecord> episodes;   // closed episodes, all actors
  Vector max_state_norm;                 // per agent, max_t ||x^i_t||
  int truncation_failures = 0;
  bool aborted = false;
  std::string diagnostic;
};

/// Runs the chosen policy for `horizon` steps from x_1 ~ N(0, Xi1) per
/// agent. Deterministic in `seed`.
TrajectoryResult run_trajectory(const PreparedSystem& sys,
                                const LearnerSpec& learner, long horizon,
                                ThetaMode mode, std::uint64_t seed);

/// splitmix64 mix of (base_seed, index).
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index);

/// floor(T / 2^k) for k = 0..levels-1, deduplicated, ascending, >= 1.
std::vector<long> default_checkpoints(long horizon, int levels = 5);

/// One model in an experiment sweep.
struct ExperimentPoint {
  std::string label;
  ModelDescription model;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<ExperimentPoint> points;
  long horizon = 2000;
  int trajectories = 100;
  ThetaMode mode = ThetaMode::kFixed;
  std::uint64_t base_seed = 0;
  std::vector<long> checkpoints;  // empty: default_checkpoints(horizon)
  int jobs = 1;
  double rank_tol = kDefaultRankTol;
  AuxDegeneracy aux_degeneracy = AuxDegeneracy::kReject;
  LearnerSpec learner;
};

/// One CSV row.
struct RegretRow {
  std::string experiment;
  int n = 0;
  long T_checkpoint = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double mean_regret_over_sqrtT = 0.0;
  double mean_K_T_aux = 0.0;
  double mean_K_T_eigen = 0.0;
};

struct PointResult {
  std::string label;
  int n = 0;
  double J = 0.0;  // fixed mode; mean over trajectories in bayes mode
  int completed = 0;
  std::vector<std::uint64_t> aborted_seeds;
  std::vector<RegretRow> rows;
};

struct ExperimentResult {
  std::vector<PointResult> points;
  std::vector<std::string> warnings;
  std::vector<RegretRow> rows() const;
};

/// Aggregates completed trajectories at the checkpoints.
PointResult aggregate(const std::string& label, int n,
                      const std::vector<TrajectoryResult>& runs,
                      const std::vector<long>& checkpoints);

/// Runs every point of the sweep with `spec.jobs` worker threads. Output is
/// independent of the worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kCsvHeader =
    "experiment,n,T_checkpoint,mean_regret,stderr_regret,"
    "mean_regret_over_sqrtT,mean_K_T_aux,mean_K_T_eigen";

void write_csv(std::ostream& os, const std::vector<RegretRow>& rows);

}  // namespace netsde
