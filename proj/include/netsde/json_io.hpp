#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netsde/common.hpp"

namespace netsde {

/// Row-major nested arrays; a 1x1 matrix is written as [[v]].
nlohmann::json matrix_to_json(const Matrix& m);

/// Accepts a number (1x1), a flat array (column vector) or nested rows.
/// Errors name `key_path`.
Matrix matrix_from_json(const nlohmann::json& j, const std::string& key_path);

std::vector<double> doubles_from_json(const nlohmann::json& j,
                                      const std::string& key_path);

}  // namespace netsde
