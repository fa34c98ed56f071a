#include "netsde/json_io.hpp"

namespace netsde {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& key_path) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array()) throw ConfigError(key_path, "expected a number or array");
  if (j.empty()) return Matrix(0, 0);
  if (!j.front().is_array()) {
    Matrix v(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) throw ConfigError(key_path, "non-numeric entry");
      v(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
    }
    return v;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(key_path, "ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ConfigError(key_path, "non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

std::vector<double> doubles_from_json(const nlohmann::json& j,
                                      const std::string& key_path) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw ConfigError(key_path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(key_path, "non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace netsde
