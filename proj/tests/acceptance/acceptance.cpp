// Acceptance suite: one PASS/FAIL line per top-level requirement of the
// library. Exit status is non-zero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "netsde/bayes.hpp"
#include "netsde/config.hpp"
#include "netsde/netmodel.hpp"
#include "netsde/riccati.hpp"
#include "netsde/sim.hpp"
#include "netsde/spectral.hpp"
#include "oracles/oracles.hpp"

namespace {

using namespace netsde;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void check(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++g_failures;
  std::printf("[%s] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Matrix gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = normal(rng);
  return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Outcome decomposition_exactness() {
  std::mt19937_64 rng(2024);
  double worst_state = 0, worst_dyn = 0, worst_cost = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkModel m = build_model(oracle::random_model(rng, 20, 3));
    const SpectralBasis b = decompose_coupling(m);
    const TrueBlocks tb = true_blocks(m, b);
    Matrix x = gaussian(m.dx, m.n, rng);
    Projection blocks = project_state(b, x);
    for (int t = 0; t < 50; ++t) {
      const Matrix u = gaussian(m.du, m.n, rng);
      const Matrix w = gaussian(m.dx, m.n, rng);
      const Projection px = project_state(b, x);
      Matrix sum = px.aux;
      for (const auto& xl : px.eigen) sum += xl;
      worst_state = std::max(worst_state, (sum - x).cwiseAbs().maxCoeff());
      worst_cost = std::max(worst_cost, rel(decomposed_cost(b, m, x, u).weighted_total(b),
                                            per_step_cost(m, x, u)));
      const Projection pu = project_state(b, u);
      const Projection pw = project_state(b, w);
      blocks.aux = tb.aux.A * blocks.aux + tb.aux.B * pu.aux + pw.aux;
      for (int l = 0; l < b.L; ++l) {
        blocks.eigen[l] = tb.eigen[l].A * blocks.eigen[l] + tb.eigen[l].B * pu.eigen[l] +
                          pw.eigen[l];
      }
      x = simulate_step(m, x, u, w);
      const Projection pn = project_state(b, x);
      double d = (pn.aux - blocks.aux).cwiseAbs().maxCoeff();
      for (int l = 0; l < b.L; ++l) {
        d = std::max(d, (pn.eigen[l] - blocks.eigen[l]).cwiseAbs().maxCoeff());
      }
      worst_dyn = std::max(worst_dyn, d);
    }
  }
  const double worst = std::max({worst_state, worst_dyn, worst_cost});
  std::ostringstream os;
  os << "100 random models x 50 steps; max error state " << worst_state << ", dynamics "
     << worst_dyn << ", cost " << worst_cost << " (tol 1e-8)";
  return {worst <= 1e-8, os.str()};
}

Outcome dare_correctness() {
  double worst_residual = 0;
  int blocks = 0;
  auto record = [&](const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                    const Matrix& S) {
    worst_residual = std::max(worst_residual, dare_residual(A, B, Q, R, S) / (1 + S.norm()));
    ++blocks;
  };
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkModel m = build_model(oracle::random_model(rng, 20, 3));
    const SpectralBasis b = decompose_coupling(m);
    const TrueBlocks tb = true_blocks(m, b);
    const GainSet g = gains_for(tb.aux, tb.eigen, b, m);
    record(tb.aux.A, tb.aux.B, m.Q, b.aux_cost_ratio() * m.R, g.S_aux);
    for (int l = 0; l < b.L; ++l) {
      record(tb.eigen[l].A, tb.eigen[l].B, m.Q, b.eigen_cost_ratio(l) * m.R, g.S_eigen[l]);
    }
  }
  double worst_scalar = 0;
  const Matrix one = Matrix::Constant(1, 1, 1.0);
  std::uniform_real_distribution<double> ua(-1.5, 1.5), ub(0.1, 2.0), uq(0.1, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double a = k == 0 ? 1.0 : ua(rng);
    const double bb = k == 0 ? 0.3 : ub(rng);
    const double q = k == 0 ? 1.0 : uq(rng);
    const double r = k == 0 ? 1.0 : uq(rng);
    const Matrix S = solve_dare(a * one, bb * one, q * one, r * one);
    record(a * one, bb * one, q * one, r * one, S);
    worst_scalar = std::max(worst_scalar, rel(S(0, 0), oracle::scalar_dare(a, bb, q, r)));
  }
  std::ostringstream os;
  os << blocks << " blocks; max residual/(1+|S|) " << worst_residual
     << " (tol 1e-9); scalar vs closed form " << worst_scalar << " (tol 1e-10); S(1,0.3,1,1)="
     << fmt("%.10f", solve_dare(one, 0.3 * one, one, one)(0, 0));
  return {worst_residual <= 1e-9 && worst_scalar <= 1e-10, os.str()};
}

Outcome planning_consistency() {
  const PreparedSystem sys = prepare_system(meanfield_preset(10));
  LearnerSpec spec;
  spec.policy = PolicyKind::kOracle;
  constexpr long kT = 20000;
  double sum = 0;
  for (int s = 0; s < 20; ++s) {
    const TrajectoryResult r =
        run_trajectory(sys, spec, kT, ThetaMode::kFixed, trajectory_seed(1, s));
    sum += r.cumulative_cost.back() / kT;
  }
  const double avg = sum / 20;
  const double err = std::abs(avg - sys.J) / sys.J;
  std::ostringstream os;
  os << "mean-field n=10, 20 seeds, T=20000: average cost " << avg << " vs J " << sys.J
     << " (" << fmt("%.2f", 100 * err) << "%, tol 3%)";
  return {err <= 0.03, os.str()};
}

Outcome posterior_conjugacy() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int dx = 1 + trial % 3;
    const int du = 1 + (trial / 3) % 3;
    const int dz = dx + du;
    const Matrix mu0 = gaussian(dz, dx, rng);
    const Matrix g = gaussian(dz, dz, rng);
    const Matrix Sigma0 = g * g.transpose() + Matrix::Identity(dz, dz);
    const Matrix theta = gaussian(dz, dx, rng);
    PosteriorState p(mu0, Sigma0, BlockTag::aux());
    std::vector<Vector> zs, xs;
    std::vector<double> s2;
    std::uniform_real_distribution<double> unif(0.1, 2.0);
    for (int t = 0; t < 1000; ++t) {
      const Vector z = gaussian(dz, 1, rng);
      const double sigma2 = unif(rng);
      const Vector x = theta.transpose() * z + std::sqrt(sigma2) * Vector(gaussian(dx, 1, rng));
      p.update({z, x, sigma2});
      zs.push_back(z);
      xs.push_back(x);
      s2.push_back(sigma2);
    }
    const auto batch = oracle::batch_posterior(mu0, Sigma0, zs, xs, s2);
    worst = std::max({worst, (p.mu() - batch.mu).cwiseAbs().maxCoeff(),
                      (p.Sigma() - batch.Sigma).cwiseAbs().maxCoeff()});
  }
  std::ostringstream os;
  os << "20 sequences of 1000 observations; max |recursive - batch| " << worst
     << " (tol 1e-8)";
  return {worst <= 1e-8, os.str()};
}

Outcome oracle_prior_sanity() {
  const PreparedSystem sys = prepare_system(meanfield_preset(10));
  LearnerSpec spec;
  spec.point_mass_prior = true;
  constexpr long kT = 2000;
  constexpr int kSeeds = 50;
  double sum = 0;
  for (int s = 0; s < kSeeds; ++s) {
    sum += run_trajectory(sys, spec, kT, ThetaMode::kFixed, trajectory_seed(2, s))
               .regret.back();
  }
  const double ratio = std::abs(sum / kSeeds) / kT / sys.J;
  std::ostringstream os;
  os << "point-mass prior, mean-field n=10, 50 seeds: |mean R(T)|/(T J) = " << ratio
     << " (tol 0.05)";
  return {ratio <= 0.05, os.str()};
}

ExperimentSpec preset_spec(const std::string& name) {
  return experiment_from_json(preset_config(name), /*base_seed=*/0, /*jobs=*/1);
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_csv(os, r.rows());
  return os.str();
}

// Shared between the regret-shape check and the determinism check.
std::string g_fig2_csv;

Outcome fig2_scaling() {
  const ExperimentSpec spec = preset_spec("fig2");
  const ExperimentResult res = run_experiment(spec);
  g_fig2_csv = csv_of(res);
  bool ok = true;
  std::ostringstream os;
  os << "T=" << spec.horizon << ", " << spec.trajectories << " trajectories;";
  double per_agent_10 = 0, per_agent_100 = 0;
  for (const auto& p : res.points) {
    if (p.completed != spec.trajectories || p.rows.size() < 3) {
      ok = false;
      os << " n=" << p.n << " completed " << p.completed << ";";
      continue;
    }
    double lo = INFINITY, hi = 0;
    for (std::size_t k = p.rows.size() - 3; k < p.rows.size(); ++k) {
      lo = std::min(lo, p.rows[k].mean_regret_over_sqrtT);
      hi = std::max(hi, p.rows[k].mean_regret_over_sqrtT);
    }
    const double spread = hi / lo;
    ok = ok && lo > 0 && spread < 1.5;
    os << " n=" << p.n << " R/sqrtT in [" << fmt("%.3g", lo) << ", " << fmt("%.3g", hi)
       << "] spread " << fmt("%.2f", spread) << ";";
    const double per_agent = p.rows.back().mean_regret_over_sqrtT / p.n;
    if (p.n == 10) per_agent_10 = per_agent;
    if (p.n == 100) per_agent_100 = per_agent;
  }
  ok = ok && per_agent_10 > 0 && per_agent_100 <= 2 * per_agent_10;
  os << " per-agent R/(n sqrtT): n=100 " << fmt("%.3g", per_agent_100) << " vs n=10 "
     << fmt("%.3g", per_agent_10) << " (limit 2x); spread tol 1.5";
  return {ok, os.str()};
}

Outcome fig3_ordering() {
  ExperimentSpec spec = preset_spec("fig3");
  std::vector<ExperimentPoint> keep;
  for (const auto& p : spec.points) {
    if (p.model.M.rows() == 40) keep.push_back(p);
  }
  spec.points = keep;
  const ExperimentResult res = run_experiment(spec);
  double small = NAN, large = NAN;
  for (const auto& p : res.points) {
    const double r = p.rows.back().mean_regret;
    if (p.label == "fig3_a0.05_b0.05") small = r;
    if (p.label == "fig3_a5_b5") large = r;
  }
  std::ostringstream os;
  os << "4n=40, T=" << spec.horizon << ", " << spec.trajectories
     << " trajectories: mean R(T) a=b=5 " << large << " vs a=b=0.05 " << small;
  return {large > small, os.str()};
}

Outcome episode_growth() {
  ExperimentSpec spec = preset_spec("meanfield");
  spec.horizon = 5000;
  spec.checkpoints = {1250, 2500, 5000};
  const ExperimentResult res = run_experiment(spec);
  const PointResult& p = res.points.front();
  auto spread = [&](auto field) {
    double lo = INFINITY, hi = 0;
    for (const auto& row : p.rows) {
      const double v = field(row) / std::sqrt(static_cast<double>(row.T_checkpoint));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return std::pair{lo, hi};
  };
  const auto aux = spread([](const RegretRow& r) { return r.mean_K_T_aux; });
  const auto eig = spread([](const RegretRow& r) { return r.mean_K_T_eigen; });
  const bool ok = p.completed == spec.trajectories && aux.first > 0 && eig.first > 0 &&
                  aux.second / aux.first <= 2 && eig.second / eig.first <= 2;
  std::ostringstream os;
  os << "mean-field n=10, " << p.completed << " trajectories: K/sqrtT aux in ["
     << fmt("%.3f", aux.first) << ", " << fmt("%.3f", aux.second) << "], eigen in ["
     << fmt("%.3f", eig.first) << ", " << fmt("%.3f", eig.second) << "] (factor-2 band)";
  return {ok, os.str()};
}

Outcome determinism() {
  if (g_fig2_csv.empty()) return {false, "regret-shape experiment did not run"};
  ExperimentSpec spec = preset_spec("fig2");
  const std::string again = csv_of(run_experiment(spec));
  spec.jobs = 4;
  const std::string threaded = csv_of(run_experiment(spec));
  const bool ok = again == g_fig2_csv && threaded == g_fig2_csv;
  std::ostringstream os;
  os << "fig2 CSV rerun (1 and 4 workers) " << (ok ? "byte-identical" : "differs") << ", "
     << g_fig2_csv.size() << " bytes";
  return {ok, os.str()};
}

}  // namespace

int main() {
  check("decomposition-exactness", decomposition_exactness);
  check("dare-correctness", dare_correctness);
  check("planning-consistency", planning_consistency);
  check("posterior-conjugacy", posterior_conjugacy);
  check("oracle-prior-sanity", oracle_prior_sanity);
  check("regret-sqrtT-scaling", fig2_scaling);
  check("regret-grows-with-spectral-radius", fig3_ordering);
  check("episode-growth", episode_growth);
  check("determinism", determinism);
  std::printf("%d check(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
