#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "netsde/bayes.hpp"
#include "netsde/netmodel.hpp"
#include "netsde/riccati.hpp"
#include "netsde/spectral.hpp"

namespace netsde {

struct ActorConfig {
  int T_min = 0;
  int max_rejects = 1000;
  bool log_posteriors = false;  // attach a posterior snapshot to each record
};

/// Episode bookkeeping of one actor (auxiliary or eigen).
struct ActorState {
  PosteriorState posterior;
  int k = 0;                    // current episode index
  long t_k = 0;                 // start of episode k
  long T_k_minus_1 = 0;         // length of episode k-1
  int T_min = 0;
  double det_at_episode_start = 0.0;
  ThetaBlock theta_k;           // sample used during episode k
  Matrix gain_k;                // optimal gain of theta_k
};

/// A closed episode, logged when the next one starts.
struct EpisodeRecord {
  BlockTag actor;
  int k = 0;
  long t_k = 0;
  long T_k = 0;
  double det = 0.0;  // det(Sigma) at the close
  Matrix theta_k;
  nlohmann::json posterior;  // null unless ActorConfig::log_posteriors
};

nlohmann::json to_json(const EpisodeRecord& r);

/// Stopping rule: the episode started at t_k ends at t when
///   t - t_k > T_min  and  (t - t_k > T_{k-1}  or  det_now < det_start / 2).
bool episode_should_end(const ActorState& a, long t, double det_now);

/// One learner in the Thompson-sampling-with-dynamic-episodes scheme. Starts
/// with t_0 = -T_min, T_{-1} = T_min and the zero parameter, so the first
/// call always opens episode 1.
class Actor {
 public:
  Actor(PosteriorState prior, UncertaintySet set, ActorConfig cfg);

  /// Absorbs `obs` (if any), closes the episode when the stopping rule fires
  /// and samples a new parameter; returns the gain to apply at time t.
  const Matrix& step(const std::optional<Observation>& obs, long t, Rng& rng);

  const ActorState& state() const { return state_; }
  const UncertaintySet& set() const { return set_; }
  const std::vector<EpisodeRecord>& episodes() const { return log_; }
  /// Episodes started so far (K_t).
  int episode_count() const { return state_.k; }
  /// Episode starts whose rejection sampler fell back to the previous sample.
  int truncation_failures() const { return truncation_failures_; }
  /// Sampled parameters whose gain could not be computed.
  int gain_failures() const { return gain_failures_; }
  bool started_episode_last_step() const { return started_; }

 private:
  ActorState state_;
  UncertaintySet set_;
  ActorConfig cfg_;
  std::vector<EpisodeRecord> log_;
  int truncation_failures_ = 0;
  int gain_failures_ = 0;
  bool started_ = false;
};

/// Per-step trace produced by the coordinator.
struct StepRecord {
  long t = 0;
  double cost = 0.0;
  std::vector<bool> new_episode;  // [aux, eigen 0, ..., eigen L-1]
  int selected_agent = -1;        // auxiliary agent j_t
  bool sampled = false;           // any actor drew a new parameter
};

/// Coordinator of one auxiliary and L eigen actors. Each call to step()
/// advances the internal clock t = 1, 2, ...; the transition observed at t is
/// (z_{t-1}, x_t).
class NetTsde {
 public:
  NetTsde(const NetworkModel& model, const SpectralBasis& basis, Actor aux,
          std::vector<Actor> eigen);

  struct Output {
    Matrix u;
    StepRecord record;
  };

  Output step(const Matrix& x, Rng& rng);

  long time() const { return t_; }
  const Actor& aux() const { return aux_; }
  const std::vector<Actor>& eigen() const { return eigen_; }

 private:
  const NetworkModel* model_;
  const SpectralBasis* basis_;
  Actor aux_;
  std::vector<Actor> eigen_;
  long t_ = 0;
  std::vector<Vector> prev_z_eigen_;
  Vector prev_z_aux_;
  int prev_agent_ = -1;
  Vector aux_sigma2_;
};

}  // namespace netsde
