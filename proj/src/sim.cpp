#include "netsde/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

namespace netsde {

Matrix draw_noise(int dx, int n, double sigma2, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(sigma2);
  Matrix w(dx, n);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < dx; ++r) w(r, i) = sigma * normal(rng);
  }
  return w;
}

Matrix simulate_step(const NetworkModel& m, const Matrix& x, const Matrix& u,
                     const Matrix& w) {
  const Matrix xM = x * m.M;
  const Matrix uM = u * m.M;
  return m.A * x + m.B * u + m.D * xM + m.E * uM + w;
}

Matrix simulate_step(const NetworkModel& m, const Matrix& x, const Matrix& u,
                     Rng& rng) {
  return simulate_step(m, x, u, draw_noise(m.dx, m.n, m.sigma_w2, rng));
}

Matrix simulate_step_blocks(const SpectralBasis& basis, const TrueBlocks& truth,
                            const Matrix& x, const Matrix& u, const Matrix& w) {
  const Projection px = project_state(basis, x);
  const Projection pu = project_state(basis, u);
  Matrix next = truth.aux.A * px.aux + truth.aux.B * pu.aux + w;
  for (int l = 0; l < basis.L; ++l) {
    next.noalias() += truth.eigen[l].A * px.eigen[l];
    next.noalias() += truth.eigen[l].B * pu.eigen[l];
  }
  return next;
}

PreparedSystem prepare_system(const ModelDescription& desc, double rank_tol,
                              AuxDegeneracy aux) {
  PreparedSystem sys;
  sys.model = build_model(desc);
  sys.basis = decompose_coupling(sys.model, rank_tol, aux);
  sys.truth = true_blocks(sys.model, sys.basis);
  sys.oracle_gains =
      gains_for(sys.truth.aux, sys.truth.eigen, sys.basis, sys.model);
  sys.J = optimal_average_cost(sys.oracle_gains, sys.basis, sys.model);
  return sys;
}

UncertaintySet make_uncertainty_set(const PreparedSystem& sys,
                                    const LearnerSpec& spec, BlockTag tag,
                                    const TrueBlocks& truth) {
  UncertaintySet set;
  set.delta = spec.delta;
  set.Q = sys.model.Q;
  set.R = sys.model.R;
  if (tag.is_aux()) {
    set.lambda = 0.0;
    set.cost_ratio = sys.basis.aux_cost_ratio();
    if (spec.membership == Membership::kNominal) set.nominal = truth.aux;
  } else {
    set.lambda = sys.basis.lambdas(tag.index);
    set.cost_ratio = sys.basis.eigen_cost_ratio(tag.index);
    if (spec.membership == Membership::kNominal) {
      set.nominal = truth.eigen[tag.index];
    }
  }
  return set;
}

namespace {

const GaussianPrior& eigen_prior(const LearnerSpec& spec, int l, int L) {
  if (spec.eigen_priors.size() == 1) return spec.eigen_priors.front();
  if (static_cast<int>(spec.eigen_priors.size()) == L) return spec.eigen_priors[l];
  throw ConfigError("prior.eigen",
                    "give one prior for all eigen blocks or one per block");
}

PosteriorState make_prior(const PreparedSystem& sys, const LearnerSpec& spec,
                          BlockTag tag, const TrueBlocks& truth) {
  if (spec.point_mass_prior) {
    const ThetaBlock& block =
        tag.is_aux() ? truth.aux : truth.eigen[tag.index];
    return PosteriorState::point_mass(block.theta(), tag);
  }
  const GaussianPrior& prior =
      tag.is_aux() ? spec.aux_prior : eigen_prior(spec, tag.index, sys.basis.L);
  const int dz = sys.model.dx + sys.model.du;
  if (prior.mean.rows() != dz || prior.mean.cols() != sys.model.dx) {
    throw ConfigError(tag.is_aux() ? "prior.aux.mean" : "prior.eigen.mean",
                      "must be (dx+du) x dx");
  }
  return PosteriorState(prior.mean, prior.cov, tag);
}

// Draws block parameters from the truncated priors (bayes mode).
TrueBlocks draw_truth(const PreparedSystem& sys, const LearnerSpec& spec,
                      Rng& rng) {
  LearnerSpec self = spec;
  self.membership = Membership::kSelf;
  TrueBlocks truth = sys.truth;
  auto draw = [&](ThetaBlock& block) {
    if (spec.point_mass_prior) return;
    const PosteriorState prior = make_prior(sys, spec, block.tag, sys.truth);
    const UncertaintySet set = make_uncertainty_set(sys, self, block.tag, sys.truth);
    TruncatedSample s =
        sample_truncated(prior, set, rng, spec.actor.max_rejects, block);
    if (!s.accepted) {
      throw NumericError("could not draw a " + block.tag.name() +
                         " parameter from the truncated prior");
    }
    block = std::move(s.theta);
  };
  draw(truth.aux);
  for (auto& block : truth.eigen) draw(block);
  return truth;
}

Matrix initial_state(const NetworkModel& m, Rng& rng) {
  if (m.Xi1.isZero(0.0)) return Matrix::Zero(m.dx, m.n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.Xi1);
  const Matrix F =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return F * draw_noise(m.dx, m.n, 1.0, rng);
}

}  // namespace

NetTsde make_learner(const PreparedSystem& sys, const LearnerSpec& spec,
                     const TrueBlocks& truth) {
  auto actor = [&](BlockTag tag) {
    return Actor(make_prior(sys, spec, tag, truth),
                 make_uncertainty_set(sys, spec, tag, truth), spec.actor);
  };
  Actor aux = actor(BlockTag::aux());
  std::vector<Actor> eigen;
  for (int l = 0; l < sys.basis.L; ++l) eigen.push_back(actor(BlockTag::eigen(l)));
  return NetTsde(sys.model, sys.basis, std::move(aux), std::move(eigen));
}

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(base_seed) ^ index);
}

TrajectoryResult run_trajectory(const PreparedSystem& sys,
                                const LearnerSpec& learner, long horizon,
                                ThetaMode mode, std::uint64_t seed) {
  const NetworkModel& m = sys.model;
  TrajectoryResult res;
  res.seed = seed;
  Rng noise_rng(seed);
  Rng algo_rng(trajectory_seed(seed, 1));

  TrueBlocks truth = sys.truth;
  GainSet oracle = sys.oracle_gains;
  res.J = sys.J;
  try {
    if (mode == ThetaMode::kBayes) {
      truth = draw_truth(sys, learner, algo_rng);
      oracle = gains_for(truth.aux, truth.eigen, sys.basis, m);
      res.J = optimal_average_cost(oracle, sys.basis, m);
    }
  } catch (const NumericError& e) {
    res.aborted = true;
    res.diagnostic = e.what();
    return res;
  }

  std::optional<NetTsde> tsde;
  if (learner.policy == PolicyKind::kNetTsde) {
    tsde.emplace(make_learner(sys, learner, truth));
  }

  res.cumulative_cost.reserve(horizon);
  res.regret.reserve(horizon);
  res.episodes_aux.reserve(horizon);
  res.episodes_eigen.reserve(horizon);
  res.max_state_norm = Vector::Zero(m.n);

  Matrix x = initial_state(m, noise_rng);
  double cumulative = 0.0;
  for (long t = 1; t <= horizon; ++t) {
    res.max_state_norm =
        res.max_state_norm.cwiseMax(x.colwise().norm().transpose());
    Matrix u;
    if (tsde) {
      u = tsde->step(x, algo_rng).u;
    } else {
      u = synthesize_control(oracle.G_aux, oracle.G_eigen,
                             project_state(sys.basis, x));
    }
    cumulative += per_step_cost(m, x, u);
    res.cumulative_cost.push_back(cumulative);
    res.regret.push_back(cumulative - static_cast<double>(t) * res.J);
    if (tsde) {
      res.episodes_aux.push_back(tsde->aux().episode_count());
      double k_sum = 0.0;
      for (const Actor& a : tsde->eigen()) k_sum += a.episode_count();
      res.episodes_eigen.push_back(
          tsde->eigen().empty() ? 0.0 : k_sum / tsde->eigen().size());
    } else {
      res.episodes_aux.push_back(0);
      res.episodes_eigen.push_back(0.0);
    }

    const Matrix w = draw_noise(m.dx, m.n, m.sigma_w2, noise_rng);
    x = mode == ThetaMode::kFixed ? simulate_step(m, x, u, w)
                                  : simulate_step_blocks(sys.basis, truth, x, u, w);
    if (!(x.norm() <= kBlowUpNorm)) {
      std::ostringstream os;
      os << "state norm exceeded " << kBlowUpNorm << " at t=" << t + 1
         << " (seed " << seed << ")";
      res.aborted = true;
      res.diagnostic = os.str();
      break;
    }
  }

  if (tsde) {
    auto append = [&](const Actor& a) {
      res.episodes.insert(res.episodes.end(), a.episodes().begin(),
                          a.episodes().end());
      res.truncation_failures += a.truncation_failures();
    };
    append(tsde->aux());
    for (const Actor& a : tsde->eigen()) append(a);
  }
  return res;
}

std::vector<long> default_checkpoints(long horizon, int levels) {
  std::vector<long> grid;
  for (int k = 0; k < levels; ++k) {
    const long t = horizon >> k;
    if (t >= 1) grid.push_back(t);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

PointResult aggregate(const std::string& label, int n,
                      const std::vector<TrajectoryResult>& runs,
                      const std::vector<long>& checkpoints) {
  PointResult p;
  p.label = label;
  p.n = n;
  std::vector<const TrajectoryResult*> done;
  double J_sum = 0.0;
  for (const auto& r : runs) {
    if (r.aborted) {
      p.aborted_seeds.push_back(r.seed);
    } else {
      done.push_back(&r);
      J_sum += r.J;
    }
  }
  p.completed = static_cast<int>(done.size());
  if (done.empty()) return p;
  p.J = J_sum / done.size();
  const double count = static_cast<double>(done.size());
  for (long T : checkpoints) {
    RegretRow row;
    row.experiment = label;
    row.n = n;
    row.T_checkpoint = T;
    double sum = 0.0, k_aux = 0.0, k_eig = 0.0;
    for (const auto* r : done) {
      sum += r->regret[T - 1];
      k_aux += r->episodes_aux[T - 1];
      k_eig += r->episodes_eigen[T - 1];
    }
    row.mean_regret = sum / count;
    double ss = 0.0;
    for (const auto* r : done) {
      const double d = r->regret[T - 1] - row.mean_regret;
      ss += d * d;
    }
    row.stderr_regret = done.size() > 1 ? std::sqrt(ss / (count - 1) / count) : 0.0;
    row.mean_regret_over_sqrtT = row.mean_regret / std::sqrt(static_cast<double>(T));
    row.mean_K_T_aux = k_aux / count;
    row.mean_K_T_eigen = k_eig / count;
    p.rows.push_back(row);
  }
  return p;
}

std::vector<RegretRow> ExperimentResult::rows() const {
  std::vector<RegretRow> all;
  for (const auto& p : points) all.insert(all.end(), p.rows.begin(), p.rows.end());
  return all;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.horizon < 1) throw ConfigError("experiment.horizon", "must be >= 1");
  if (spec.trajectories < 1) {
    throw ConfigError("experiment.trajectories", "must be >= 1");
  }
  if (spec.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  std::vector<long> checkpoints =
      spec.checkpoints.empty() ? default_checkpoints(spec.horizon) : spec.checkpoints;
  for (long T : checkpoints) {
    if (T < 1 || T > spec.horizon) {
      throw ConfigError("experiment.checkpoints", "must lie in [1, horizon]");
    }
  }

  ExperimentResult result;
  for (const auto& point : spec.points) {
    const PreparedSystem sys =
        prepare_system(point.model, spec.rank_tol, spec.aux_degeneracy);
    std::vector<TrajectoryResult> runs(spec.trajectories);
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i = next++; i < spec.trajectories; i = next++) {
        const std::uint64_t seed = trajectory_seed(spec.base_seed, i);
        try {
          runs[i] = run_trajectory(sys, spec.learner, spec.horizon, spec.mode, seed);
        } catch (const NumericError& e) {
          runs[i].seed = seed;
          runs[i].aborted = true;
          runs[i].diagnostic = e.what();
        }
      }
    };
    const int workers = std::min(spec.jobs, spec.trajectories);
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    PointResult agg = aggregate(point.label, sys.model.n, runs, checkpoints);
    for (const auto& r : runs) {
      if (r.aborted) {
        result.warnings.push_back(point.label + ": trajectory aborted: " +
                                  r.diagnostic);
      }
    }
    if (agg.completed == 0) {
      result.warnings.push_back(point.label + ": no trajectory completed");
    }
    result.points.push_back(std::move(agg));
  }
  return result;
}

void write_csv(std::ostream& os, const std::vector<RegretRow>& rows) {
  os << kCsvHeader << '\n';
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.experiment.c_str(), r.n, r.T_checkpoint, r.mean_regret,
                  r.stderr_regret, r.mean_regret_over_sqrtT, r.mean_K_T_aux,
                  r.mean_K_T_eigen);
    os << buf;
  }
}

}  // namespace netsde
