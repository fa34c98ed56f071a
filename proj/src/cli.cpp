#include "netsde/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "netsde/config.hpp"
#include "netsde/json_io.hpp"
#include "netsde/riccati.hpp"
#include "netsde/sim.hpp"
#include "netsde/spectral.hpp"

namespace netsde {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path prepare_out_dir(const RunConfig& rc) {
  fs::path dir = rc.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("out", "cannot create output directory " + dir.string());
  }
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("out", "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const AssumptionError& e) {
    err << "assumption error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kConfig);
  }
}

ExperimentSpec load_spec(const RunConfig& rc, json* resolved = nullptr) {
  json cfg = resolve_config(rc.preset, rc.config_path, rc.overrides);
  if (resolved) *resolved = cfg;
  return experiment_from_json(cfg, rc.base_seed, rc.jobs);
}

json gains_to_json(const GainSet& g) {
  json j = {{"S_aux", matrix_to_json(g.S_aux)},
            {"G_aux", matrix_to_json(g.G_aux)},
            {"S_eigen", json::array()},
            {"G_eigen", json::array()}};
  for (const auto& S : g.S_eigen) j["S_eigen"].push_back(matrix_to_json(S));
  for (const auto& G : g.G_eigen) j["G_eigen"].push_back(matrix_to_json(G));
  return j;
}

std::string brief(const Matrix& m) {
  std::ostringstream os;
  os << std::setprecision(10);
  if (m.size() == 1) {
    os << m(0, 0);
  } else {
    Eigen::IOFormat fmt(10, 0, ", ", "; ", "", "", "[", "]");
    os << m.format(fmt);
  }
  return os.str();
}

}  // namespace

int cmd_validate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentSpec spec = load_spec(rc);
    for (const auto& point : spec.points) {
      out << "== " << point.label << '\n';
      const NetworkModel m = build_model(point.model);
      for (const auto& w : m.warnings) err << "warning: " << w << '\n';
      out << "n=" << m.n << " dx=" << m.dx << " du=" << m.du << '\n';
      out << "A2 (Q, R positive definite): ok\n";
      const SpectralBasis b =
          decompose_coupling(m, spec.rank_tol, spec.aux_degeneracy);
      out << "L=" << b.L << '\n';
      for (int l = 0; l < b.L; ++l) {
        out << "  lambda" << l + 1 << "=" << b.lambdas(l) << " q=" << b.q_ell(l)
            << " r=" << b.r_ell(l) << " i_star=" << b.i_star[l] << '\n';
      }
      out << "q0=" << b.q0 << " r0=" << b.r0 << '\n';
      out << "A3 (q0, r0, q_l, r_l > 0): ok\n";
      int inactive = 0;
      for (int i = 0; i < b.n; ++i) inactive += b.aux_active(i) ? 0 : 1;
      if (inactive == 0) {
        out << "A5 (auxiliary weights non-zero): ok\n";
      } else {
        out << "A5 (auxiliary weights non-zero): relaxed, " << inactive
            << " agent(s) with deterministic auxiliary state\n";
      }
      const TrueBlocks tb = true_blocks(m, b);
      try {
        gains_for(tb.aux, tb.eigen, b, m);
      } catch (const NumericError& e) {
        throw AssumptionError("A1", e.what());
      }
      out << "A1 (all blocks stabilizable, Riccati converged): ok\n";
    }
    return static_cast<int>(ExitCode::kOk);
  });
}

int cmd_plan(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentSpec spec = load_spec(rc);
    json report = json::array();
    for (const auto& point : spec.points) {
      const PreparedSystem sys =
          prepare_system(point.model, spec.rank_tol, spec.aux_degeneracy);
      out << "== " << point.label << " (n=" << sys.model.n << ", L="
          << sys.basis.L << ")\n";
      out << "S_aux=" << brief(sys.oracle_gains.S_aux)
          << " G_aux=" << brief(sys.oracle_gains.G_aux) << '\n';
      for (int l = 0; l < sys.basis.L; ++l) {
        out << "S_" << l + 1 << "=" << brief(sys.oracle_gains.S_eigen[l])
            << " G_" << l + 1 << "=" << brief(sys.oracle_gains.G_eigen[l]) << '\n';
      }
      out << std::setprecision(12) << "J=" << sys.J << '\n';
      json entry = gains_to_json(sys.oracle_gains);
      entry["label"] = point.label;
      entry["n"] = sys.model.n;
      entry["L"] = sys.basis.L;
      entry["lambdas"] = std::vector<double>(sys.basis.lambdas.data(),
                                             sys.basis.lambdas.data() + sys.basis.L);
      entry["J"] = sys.J;
      report.push_back(std::move(entry));
    }
    write_json(prepare_out_dir(rc) / "plan.json", report);
    return static_cast<int>(ExitCode::kOk);
  });
}

int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentSpec spec = load_spec(rc);
    const auto& point = spec.points.front();
    const PreparedSystem sys =
        prepare_system(point.model, spec.rank_tol, spec.aux_degeneracy);
    const std::uint64_t seed = trajectory_seed(spec.base_seed, 0);
    const TrajectoryResult r =
        run_trajectory(sys, spec.learner, spec.horizon, spec.mode, seed);
    const fs::path dir = prepare_out_dir(rc);
    {
      std::ofstream f(dir / "trajectory.csv");
      f << "t,cumulative_cost,regret,K_aux,K_eigen\n";
      char buf[256];
      for (std::size_t t = 0; t < r.regret.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d,%.17g\n", t + 1,
                      r.cumulative_cost[t], r.regret[t], r.episodes_aux[t],
                      r.episodes_eigen[t]);
        f << buf;
      }
    }
    {
      std::ofstream f(dir / "episodes.jsonl");
      for (const auto& e : r.episodes) f << to_json(e).dump() << '\n';
    }
    out << "seed=" << seed << " J=" << std::setprecision(10) << r.J
        << " steps=" << r.regret.size();
    if (!r.regret.empty()) out << " R(T)=" << r.regret.back();
    out << " episodes=" << r.episodes.size() << '\n';
    if (r.aborted) {
      err << "error: trajectory aborted: " << r.diagnostic << '\n';
      return static_cast<int>(ExitCode::kNumeric);
    }
    return static_cast<int>(ExitCode::kOk);
  });
}

int cmd_experiment(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    json cfg;
    const ExperimentSpec spec = load_spec(rc, &cfg);
    const fs::path dir = prepare_out_dir(rc);
    const ExperimentResult result = run_experiment(spec);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';

    {
      std::ofstream f(dir / "regret.csv");
      write_csv(f, result.rows());
    }
    json manifest = {{"experiment", spec.name},
                     {"config", cfg},
                     {"config_hash", content_hash(cfg)},
                     {"base_seed", spec.base_seed},
                     {"points", json::array()}};
    int completed_total = 0;
    for (const auto& p : result.points) {
      completed_total += p.completed;
      manifest["points"].push_back({{"label", p.label},
                                    {"n", p.n},
                                    {"J", p.J},
                                    {"completed", p.completed},
                                    {"aborted_seeds", p.aborted_seeds}});
    }
    write_json(dir / "manifest.json", manifest);

    out << std::left << std::setw(24) << "experiment" << std::setw(6) << "n"
        << std::setw(8) << "T" << std::setw(16) << "mean R(T)" << std::setw(14)
        << "R(T)/sqrt(T)" << "completed\n";
    for (const auto& p : result.points) {
      if (p.rows.empty()) continue;
      const auto& last = p.rows.back();
      out << std::left << std::setw(24) << p.label << std::setw(6) << p.n
          << std::setw(8) << last.T_checkpoint << std::setw(16)
          << std::setprecision(6) << last.mean_regret << std::setw(14)
          << last.mean_regret_over_sqrtT << p.completed << '\n';
    }
    if (completed_total == 0) {
      err << "error: every trajectory aborted\n";
      return static_cast<int>(ExitCode::kNumeric);
    }
    return static_cast<int>(ExitCode::kOk);
  });
}

int run_command(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.subcommand == "validate") return cmd_validate(rc, out, err);
  if (rc.subcommand == "plan") return cmd_plan(rc, out, err);
  if (rc.subcommand == "simulate") return cmd_simulate(rc, out, err);
  if (rc.subcommand == "experiment") return cmd_experiment(rc, out, err);
  err << "error: unknown subcommand '" << rc.subcommand << "'\n";
  return static_cast<int>(ExitCode::kConfig);
}

}  // namespace netsde
