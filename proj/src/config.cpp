#include "netsde/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "netsde/json_io.hpp"

namespace netsde {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double get_number(const json& obj, const std::string& key,
                  const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(join(path, key), "expected a number");
  return obj[key].get<double>();
}

long get_integer(const json& obj, const std::string& key,
                 const std::string& path, long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError(join(path, key), "expected an integer");
  }
  return obj[key].get<long>();
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& path, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(join(path, key), "expected a string");
  return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(join(path, key), "expected a boolean");
  return obj[key].get<bool>();
}

const json& section(const json& cfg, const std::string& key) {
  static const json empty = json::object();
  return cfg.contains(key) ? cfg[key] : empty;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// The built-in experiment presets restrict samples to gains that keep the
// true block stable, as in the reference experiments.
json preset_learner() { return {{"membership", "nominal"}}; }

json meanfield_sweep_point(int n) {
  return {{"label", "fig2_meanfield"}, {"model", {{"n", n}}}};
}

GaussianPrior prior_from_json(const json& j, const std::string& path, int dx,
                              int du) {
  const int dz = dx + du;
  GaussianPrior p{Matrix::Ones(dz, dx), Matrix::Identity(dz, dz)};
  check_keys(j, path, {"mean", "cov"});
  if (j.contains("mean")) p.mean = matrix_from_json(j["mean"], join(path, "mean"));
  if (j.contains("cov")) p.cov = matrix_from_json(j["cov"], join(path, "cov"));
  if (p.mean.rows() != dz || p.mean.cols() != dx) {
    throw ConfigError(join(path, "mean"), "must be (dx+du) x dx");
  }
  if (p.cov.rows() != dz || p.cov.cols() != dz) {
    throw ConfigError(join(path, "cov"), "must be (dx+du) x (dx+du)");
  }
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"meanfield", "lowrank", "fig2", "fig3"};
}

json preset_config(const std::string& name) {
  if (name == "meanfield") {
    return {{"name", "meanfield"},
            {"model", {{"preset", "meanfield"}, {"n", 10}, {"kappa", 0.5}}},
            {"learner", preset_learner()}};
  }
  if (name == "lowrank") {
    return {{"name", "lowrank"},
            {"model",
             {{"preset", "lowrank"}, {"a", 0.05}, {"b", 0.05}, {"n_rep", 1}}},
            {"learner", preset_learner()}};
  }
  if (name == "fig2") {
    // n = 1 has a deterministic (identically zero) auxiliary state.
    return {{"name", "fig2"},
            {"model", {{"preset", "meanfield"}, {"kappa", 0.5}}},
            {"spectral", {{"allow_degenerate_aux", true}}},
            {"learner", preset_learner()},
            {"sweep",
             {meanfield_sweep_point(1), meanfield_sweep_point(10),
              meanfield_sweep_point(100)}}};
  }
  if (name == "fig3") {
    json sweep = json::array();
    for (double ab : {0.05, 5.0}) {
      for (int n_rep : {1, 10, 20, 25}) {
        sweep.push_back(
            {{"label", "fig3_a" + format_number(ab) + "_b" + format_number(ab)},
             {"model", {{"a", ab}, {"b", ab}, {"n_rep", n_rep}}}});
      }
    }
    return {{"name", "fig3"},
            {"model", {{"preset", "lowrank"}}},
            {"learner", preset_learner()},
            {"sweep", std::move(sweep)}};
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  json* node = &cfg;
  std::stringstream ss(key);
  std::string part;
  std::string walked;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError(key, "empty key segment");
    walked = join(walked, parts[i]);
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError(walked, "not an object");
      *node = json::object();
    }
    node = &(*node)[parts[i]];
  }
  *node = std::move(value);
}

json resolve_config(const std::optional<std::string>& preset,
                    const std::optional<std::string>& config_path,
                    const std::vector<std::string>& overrides) {
  json cfg = preset ? preset_config(*preset) : json::object();
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("config", "cannot open " + *config_path);
    json file = json::parse(in, nullptr, /*allow_exceptions=*/false,
                            /*ignore_comments=*/true);
    if (file.is_discarded() || !file.is_object()) {
      throw ConfigError("config", *config_path + " is not a JSON object");
    }
    cfg.merge_patch(file);
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

ModelDescription model_from_json(const json& model, const std::string& path) {
  check_keys(model, path,
             {"preset", "n", "kappa", "a", "b", "n_rep", "M", "A", "B", "D",
              "E", "Q", "R", "q_coeffs", "r_coeffs", "sigma_w2", "Xi1"});
  ModelDescription d;
  const std::string preset = get_string(model, "preset", path, "");
  if (preset == "meanfield") {
    d = meanfield_preset(static_cast<int>(get_integer(model, "n", path, 10)),
                         get_number(model, "kappa", path, 0.5));
  } else if (preset == "lowrank") {
    d = lowrank_preset(get_number(model, "a", path, 0.05),
                       get_number(model, "b", path, 0.05),
                       static_cast<int>(get_integer(model, "n_rep", path, 1)));
  } else if (!preset.empty()) {
    throw ConfigError(join(path, "preset"), "unknown model preset '" + preset + "'");
  } else {
    for (const char* key : {"M", "A", "B", "Q", "R"}) {
      if (!model.contains(key)) throw ConfigError(join(path, key), "required");
    }
  }
  auto matrix = [&](const char* key, Matrix& target) {
    if (model.contains(key)) target = matrix_from_json(model[key], join(path, key));
  };
  matrix("M", d.M);
  matrix("A", d.A);
  matrix("B", d.B);
  matrix("D", d.D);
  matrix("E", d.E);
  matrix("Q", d.Q);
  matrix("R", d.R);
  matrix("Xi1", d.Xi1);
  // D and E default to "no network coupling" for hand-written models.
  if (d.D.size() == 0) d.D = Matrix::Zero(d.A.rows(), d.A.cols());
  if (d.E.size() == 0) d.E = Matrix::Zero(d.B.rows(), d.B.cols());
  if (model.contains("q_coeffs")) {
    d.q_coeffs = doubles_from_json(model["q_coeffs"], join(path, "q_coeffs"));
  }
  if (model.contains("r_coeffs")) {
    d.r_coeffs = doubles_from_json(model["r_coeffs"], join(path, "r_coeffs"));
  }
  d.sigma_w2 = get_number(model, "sigma_w2", path, d.sigma_w2);
  if (d.sigma_w2 < 0.0) throw ConfigError(join(path, "sigma_w2"), "must be >= 0");
  return d;
}

LearnerSpec learner_from_json(const json& cfg, int dx, int du) {
  LearnerSpec spec;
  const json& prior = section(cfg, "prior");
  check_keys(prior, "prior", {"aux", "eigen", "point_mass"});
  spec.point_mass_prior = get_bool(prior, "point_mass", "prior", false);
  spec.aux_prior = prior_from_json(section(prior, "aux"), "prior.aux", dx, du);
  if (prior.contains("eigen") && prior["eigen"].is_array()) {
    for (std::size_t l = 0; l < prior["eigen"].size(); ++l) {
      spec.eigen_priors.push_back(prior_from_json(
          prior["eigen"][l], "prior.eigen." + std::to_string(l), dx, du));
    }
  } else {
    spec.eigen_priors.push_back(
        prior_from_json(section(prior, "eigen"), "prior.eigen", dx, du));
  }

  const json& learner = section(cfg, "learner");
  check_keys(learner, "learner",
             {"policy", "delta", "membership", "T_min", "max_rejects",
              "log_posteriors"});
  const std::string policy = get_string(learner, "policy", "learner", "net-tsde");
  if (policy == "net-tsde") {
    spec.policy = PolicyKind::kNetTsde;
  } else if (policy == "oracle") {
    spec.policy = PolicyKind::kOracle;
  } else {
    throw ConfigError("learner.policy", "expected 'net-tsde' or 'oracle'");
  }
  spec.delta = get_number(learner, "delta", "learner", 0.99);
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
    throw ConfigError("learner.delta", "must lie in (0, 1)");
  }
  const std::string membership =
      get_string(learner, "membership", "learner", "self");
  if (membership == "self") {
    spec.membership = Membership::kSelf;
  } else if (membership == "nominal") {
    spec.membership = Membership::kNominal;
  } else {
    throw ConfigError("learner.membership", "expected 'self' or 'nominal'");
  }
  spec.actor.T_min = static_cast<int>(get_integer(learner, "T_min", "learner", 0));
  if (spec.actor.T_min < 0) throw ConfigError("learner.T_min", "must be >= 0");
  spec.actor.max_rejects =
      static_cast<int>(get_integer(learner, "max_rejects", "learner", 1000));
  if (spec.actor.max_rejects < 1) {
    throw ConfigError("learner.max_rejects", "must be >= 1");
  }
  spec.actor.log_posteriors =
      get_bool(learner, "log_posteriors", "learner", false);
  return spec;
}

double rank_tol_from_json(const json& cfg) {
  const json& s = section(cfg, "spectral");
  check_keys(s, "spectral", {"rank_tol", "allow_degenerate_aux"});
  const double tol = get_number(s, "rank_tol", "spectral", kDefaultRankTol);
  if (!(tol > 0.0)) throw ConfigError("spectral.rank_tol", "must be positive");
  return tol;
}

AuxDegeneracy aux_degeneracy_from_json(const json& cfg) {
  const json& s = section(cfg, "spectral");
  return get_bool(s, "allow_degenerate_aux", "spectral", false)
             ? AuxDegeneracy::kAllow
             : AuxDegeneracy::kReject;
}

ExperimentSpec experiment_from_json(const json& cfg, std::uint64_t base_seed,
                                    int jobs) {
  check_keys(cfg, "",
             {"name", "model", "sweep", "prior", "learner", "spectral",
              "experiment"});
  ExperimentSpec spec;
  spec.name = get_string(cfg, "name", "", "experiment");
  spec.base_seed = base_seed;
  spec.jobs = jobs;
  spec.rank_tol = rank_tol_from_json(cfg);
  spec.aux_degeneracy = aux_degeneracy_from_json(cfg);

  const json base = section(cfg, "model");
  if (cfg.contains("sweep")) {
    if (!cfg["sweep"].is_array() || cfg["sweep"].empty()) {
      throw ConfigError("sweep", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < cfg["sweep"].size(); ++i) {
      const std::string path = "sweep." + std::to_string(i);
      const json& entry = cfg["sweep"][i];
      check_keys(entry, path, {"label", "model"});
      json model = base;
      if (entry.contains("model")) model.merge_patch(entry["model"]);
      spec.points.push_back({get_string(entry, "label", path, spec.name),
                             model_from_json(model, path + ".model")});
    }
  } else {
    spec.points.push_back({spec.name, model_from_json(base, "model")});
  }

  const auto& first = spec.points.front().model;
  spec.learner = learner_from_json(cfg, static_cast<int>(first.A.rows()),
                                   static_cast<int>(first.B.cols()));

  const json& ex = section(cfg, "experiment");
  check_keys(ex, "experiment", {"horizon", "trajectories", "mode", "checkpoints"});
  spec.horizon = get_integer(ex, "horizon", "experiment", 2000);
  spec.trajectories =
      static_cast<int>(get_integer(ex, "trajectories", "experiment", 100));
  if (spec.horizon < 1) throw ConfigError("experiment.horizon", "must be >= 1");
  if (spec.trajectories < 1) {
    throw ConfigError("experiment.trajectories", "must be >= 1");
  }
  const std::string mode = get_string(ex, "mode", "experiment", "fixed-theta");
  if (mode == "fixed-theta") {
    spec.mode = ThetaMode::kFixed;
  } else if (mode == "bayes") {
    spec.mode = ThetaMode::kBayes;
  } else {
    throw ConfigError("experiment.mode", "expected 'fixed-theta' or 'bayes'");
  }
  if (ex.contains("checkpoints")) {
    for (double v : doubles_from_json(ex["checkpoints"], "experiment.checkpoints")) {
      spec.checkpoints.push_back(static_cast<long>(v));
    }
  }
  return spec;
}

std::string content_hash(const json& cfg) {
  const std::string body = cfg.dump();
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace netsde
