#include "netsde/tsde.hpp"

#include "netsde/json_io.hpp"

namespace netsde {

nlohmann::json to_json(const EpisodeRecord& r) {
  nlohmann::json j = {{"actor", r.actor.name()}, {"k", r.k},
                      {"t_k", r.t_k},            {"T_k", r.T_k},
                      {"det", r.det},            {"theta_k", matrix_to_json(r.theta_k)}};
  if (!r.posterior.is_null()) j["posterior"] = r.posterior;
  return j;
}

bool episode_should_end(const ActorState& a, long t, double det_now) {
  const long elapsed = t - a.t_k;
  if (elapsed <= a.T_min) return false;
  return elapsed > a.T_k_minus_1 || det_now < 0.5 * a.det_at_episode_start;
}

Actor::Actor(PosteriorState prior, UncertaintySet set, ActorConfig cfg)
    : state_{std::move(prior), 0, 0, 0, 0, 0.0, {}, {}}, set_(std::move(set)), cfg_(cfg) {
  const int dx = state_.posterior.dx();
  const int du = state_.posterior.dz() - dx;
  state_.k = 0;
  state_.t_k = -cfg_.T_min;
  state_.T_k_minus_1 = cfg_.T_min;
  state_.T_min = cfg_.T_min;
  state_.det_at_episode_start = state_.posterior.det();
  state_.theta_k = ThetaBlock::zero(dx, du, state_.posterior.tag());
  state_.gain_k = Matrix::Zero(du, dx);
}

const Matrix& Actor::step(const std::optional<Observation>& obs, long t,
                          Rng& rng) {
  if (obs) state_.posterior.update(*obs);
  started_ = false;
  const double det_now = state_.posterior.det();
  if (!episode_should_end(state_, t, det_now)) return state_.gain_k;

  const long length = t - state_.t_k;
  if (state_.k > 0) {
    log_.push_back({state_.posterior.tag(), state_.k, state_.t_k, length,
                    det_now, state_.theta_k.theta(), nullptr});
    if (cfg_.log_posteriors) log_.back().posterior = to_json(state_.posterior);
  }
  state_.T_k_minus_1 = length;
  state_.k += 1;
  state_.t_k = t;
  state_.det_at_episode_start = det_now;
  started_ = true;

  TruncatedSample draw = sample_truncated(state_.posterior, set_, rng,
                                          cfg_.max_rejects, state_.theta_k);
  if (!draw.accepted) {
    ++truncation_failures_;
    return state_.gain_k;
  }
  try {
    Matrix gain =
        solve_block(draw.theta, set_.Q, set_.R, set_.cost_ratio, set_.dare).G;
    state_.theta_k = std::move(draw.theta);
    state_.gain_k = std::move(gain);
  } catch (const NumericError&) {
    ++gain_failures_;
  }
  return state_.gain_k;
}

NetTsde::NetTsde(const NetworkModel& model, const SpectralBasis& basis,
                 Actor aux, std::vector<Actor> eigen)
    : model_(&model), basis_(&basis), aux_(std::move(aux)),
      eigen_(std::move(eigen)), prev_z_eigen_(eigen_.size()) {
  if (static_cast<int>(eigen_.size()) != basis.L) {
    throw ConfigError("prior.eigen", "need one eigen actor per eigenvalue");
  }
  aux_sigma2_.resize(basis.n);
  for (int i = 0; i < basis.n; ++i) {
    aux_sigma2_(i) = aux_noise_variance(basis, model, i);
  }
}

NetTsde::Output NetTsde::step(const Matrix& x, Rng& rng) {
  ++t_;
  const int dx = model_->dx;
  const int du = model_->du;
  const Projection px = project_state(*basis_, x);

  Output out;
  out.record.t = t_;
  out.record.new_episode.assign(eigen_.size() + 1, false);

  std::vector<Matrix> gains(eigen_.size());
  for (std::size_t l = 0; l < eigen_.size(); ++l) {
    const int agent = basis_->i_star[l];
    std::optional<Observation> obs;
    if (t_ > 1) {
      obs = Observation{prev_z_eigen_[l], px.eigen[l].col(agent),
                        eigen_noise_variance(*basis_, *model_,
                                             static_cast<int>(l), agent)};
    }
    gains[l] = eigen_[l].step(obs, t_, rng);
    out.record.new_episode[l + 1] = eigen_[l].started_episode_last_step();
  }

  std::optional<Observation> aux_obs;
  if (t_ > 1 && prev_agent_ >= 0) {
    aux_obs = Observation{prev_z_aux_, px.aux.col(prev_agent_),
                          aux_sigma2_(prev_agent_)};
  }
  const Matrix G_aux = aux_.step(aux_obs, t_, rng);
  out.record.new_episode[0] = aux_.started_episode_last_step();

  out.u = synthesize_control(G_aux, gains, px);

  // Regressors for the transition consumed at t+1.
  for (std::size_t l = 0; l < eigen_.size(); ++l) {
    const int agent = basis_->i_star[l];
    Vector z(dx + du);
    z.head(dx) = px.eigen[l].col(agent);
    z.tail(du) = gains[l] * px.eigen[l].col(agent);
    prev_z_eigen_[l] = std::move(z);
  }
  Matrix z_aux(dx + du, basis_->n);
  z_aux.topRows(dx) = px.aux;
  z_aux.bottomRows(du) = G_aux * px.aux;
  prev_agent_ = select_agent(aux_.state().posterior, z_aux, aux_sigma2_);
  if (prev_agent_ >= 0) prev_z_aux_ = z_aux.col(prev_agent_);

  out.record.selected_agent = prev_agent_;
  for (bool b : out.record.new_episode) out.record.sampled = out.record.sampled || b;
  return out;
}

}  // namespace netsde
