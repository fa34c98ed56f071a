#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netsde/netmodel.hpp"
#include "netsde/sim.hpp"

namespace netsde {

/// Built-in configurations selectable with --preset.
/// meanfield, lowrank: single models; fig2, fig3: the scaling sweeps.
nlohmann::json preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Applies one "dotted.key=value" override. The value is parsed as JSON when
/// possible and kept as a string otherwise; missing objects are created.
void apply_override(nlohmann::json& cfg, const std::string& assignment);

/// preset (if any), then the file (JSON merge patch), then overrides.
nlohmann::json resolve_config(const std::optional<std::string>& preset,
                              const std::optional<std::string>& config_path,
                              const std::vector<std::string>& overrides);

/// Model block of a config: {"preset": "meanfield"|"lowrank", preset
/// parameters, and any of M, A, B, D, E, Q, R, q_coeffs, r_coeffs, sigma_w2,
/// Xi1}. Errors carry the key path.
ModelDescription model_from_json(const nlohmann::json& model,
                                 const std::string& path = "model");

/// The learner block: "prior" and "learner" sections; dimensions come from
/// the model.
LearnerSpec learner_from_json(const nlohmann::json& cfg, int dx, int du);

/// Spectral options: rank tolerance and whether agents with a deterministic
/// auxiliary state are allowed.
double rank_tol_from_json(const nlohmann::json& cfg);
AuxDegeneracy aux_degeneracy_from_json(const nlohmann::json& cfg);

/// Full experiment from a resolved config.
ExperimentSpec experiment_from_json(const nlohmann::json& cfg,
                                    std::uint64_t base_seed, int jobs);

/// Git blob id (SHA-1 of "blob <len>\0<bytes>") of the canonical dump.
std::string content_hash(const nlohmann::json& cfg);

}  // namespace netsde
