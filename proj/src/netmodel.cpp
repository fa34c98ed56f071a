#include "netsde/netmodel.hpp"

#include <cmath>
#include <sstream>

namespace netsde {
namespace {

constexpr double kAsymmetryWarnTol = 1e-8;
constexpr double kPositiveDefiniteTol = 1e-10;

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "expected " << rows << "x" << cols << ", got " << m.rows() << "x"
       << m.cols();
    throw ConfigError("model." + name, os.str());
  }
}

void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) throw ConfigError("model." + name, "non-finite entry");
}

void require_spd(const Matrix& m, const std::string& name) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kPositiveDefiniteTol) {
    throw AssumptionError("A2", name + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig > kPositiveDefiniteTol)) {
    std::ostringstream os;
    os << name << " is not positive definite (min eigenvalue " << min_eig
       << ")";
    throw AssumptionError("A2", os.str());
  }
}

}  // namespace

NetworkModel build_model(ModelDescription desc) {
  NetworkModel m;
  if (desc.M.rows() == 0 || desc.M.rows() != desc.M.cols()) {
    throw ConfigError("model.M", "must be a non-empty square matrix");
  }
  if (desc.A.rows() == 0 || desc.A.rows() != desc.A.cols()) {
    throw ConfigError("model.A", "must be a non-empty square matrix");
  }
  if (desc.B.cols() == 0) throw ConfigError("model.B", "must have columns");
  m.n = static_cast<int>(desc.M.rows());
  m.dx = static_cast<int>(desc.A.rows());
  m.du = static_cast<int>(desc.B.cols());

  require_shape(desc.B, m.dx, m.du, "B");
  require_shape(desc.D, m.dx, m.dx, "D");
  require_shape(desc.E, m.dx, m.du, "E");
  require_shape(desc.Q, m.dx, m.dx, "Q");
  require_shape(desc.R, m.du, m.du, "R");
  if (desc.Xi1.size() == 0) desc.Xi1 = Matrix::Zero(m.dx, m.dx);
  require_shape(desc.Xi1, m.dx, m.dx, "Xi1");
  for (const auto& [mat, name] :
       {std::pair{&desc.M, "M"}, {&desc.A, "A"}, {&desc.B, "B"},
        {&desc.D, "D"}, {&desc.E, "E"}, {&desc.Q, "Q"}, {&desc.R, "R"},
        {&desc.Xi1, "Xi1"}}) {
    require_finite(*mat, name);
  }
  if (desc.q_coeffs.empty()) {
    throw ConfigError("model.q_coeffs", "needs at least one coefficient");
  }
  if (desc.r_coeffs.empty()) {
    throw ConfigError("model.r_coeffs", "needs at least one coefficient");
  }
  if (!(desc.sigma_w2 >= 0.0) || !std::isfinite(desc.sigma_w2)) {
    throw ConfigError("model.sigma_w2", "must be a finite non-negative number");
  }

  const double asym = (desc.M - desc.M.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryWarnTol) {
    std::ostringstream os;
    os << "coupling matrix asymmetric by " << asym << "; symmetrized";
    m.warnings.push_back(os.str());
  }
  m.M = 0.5 * (desc.M + desc.M.transpose());

  require_spd(desc.Q, "Q");
  require_spd(desc.R, "R");
  Eigen::SelfAdjointEigenSolver<Matrix> xi(desc.Xi1, Eigen::EigenvaluesOnly);
  if (xi.eigenvalues().minCoeff() < -kPositiveDefiniteTol) {
    throw ConfigError("model.Xi1", "must be positive semidefinite");
  }

  m.A = std::move(desc.A);
  m.B = std::move(desc.B);
  m.D = std::move(desc.D);
  m.E = std::move(desc.E);
  m.Q = std::move(desc.Q);
  m.R = std::move(desc.R);
  m.Xi1 = std::move(desc.Xi1);
  m.q_coeffs = std::move(desc.q_coeffs);
  m.r_coeffs = std::move(desc.r_coeffs);
  m.sigma_w2 = desc.sigma_w2;
  std::tie(m.H_x, m.H_u) = cost_weight_matrices(m);
  return m;
}

ModelDescription meanfield_preset(int n, double kappa) {
  if (n < 1) throw ConfigError("model.n", "must be >= 1");
  ModelDescription d;
  d.M = Matrix::Constant(n, n, 1.0 / n);
  d.A = Matrix::Constant(1, 1, 1.0);
  d.B = Matrix::Constant(1, 1, 0.3);
  d.D = Matrix::Constant(1, 1, 0.5);
  d.E = Matrix::Constant(1, 1, 0.2);
  d.Q = Matrix::Identity(1, 1);
  d.R = Matrix::Identity(1, 1);
  d.q_coeffs = {1.0 / n, kappa / n};
  d.r_coeffs = {1.0 / n, kappa / n};
  d.sigma_w2 = 1.0;
  return d;
}

Matrix lowrank_base_graph(double a, double b) {
  Matrix g(4, 4);
  // clang-format off
  g << 0, a, 0, b,
       a, 0, a, 0,
       0, a, 0, b,
       b, 0, b, 0;
  // clang-format on
  return g;
}

ModelDescription lowrank_preset(double a, double b, int n_rep) {
  if (n_rep < 1) throw ConfigError("model.n_rep", "must be >= 1");
  ModelDescription d = meanfield_preset(1);
  const Matrix base = lowrank_base_graph(a, b);
  const Matrix complete = Matrix::Constant(n_rep, n_rep, 1.0 / n_rep);
  d.M = Matrix::Zero(4 * n_rep, 4 * n_rep);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      d.M.block(i * n_rep, j * n_rep, n_rep, n_rep) = base(i, j) * complete;
    }
  }
  d.q_coeffs = {1.0, -2.0, 1.0};
  d.r_coeffs = {1.0};
  return d;
}

Matrix matrix_polynomial(const Matrix& M, const std::vector<double>& coeffs) {
  const auto n = M.rows();
  Matrix result = Matrix::Zero(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k > 0) power = power * M;
    result += coeffs[k] * power;
  }
  return result;
}

std::pair<Matrix, Matrix> cost_weight_matrices(const NetworkModel& m) {
  return {matrix_polynomial(m.M, m.q_coeffs),
          matrix_polynomial(m.M, m.r_coeffs)};
}

double per_step_cost(const NetworkModel& m, const Matrix& x, const Matrix& u) {
  // trace(Q x H xᵀ) = sum((Q x) ∘ (x H)) for symmetric Q, H.
  const double state = ((m.Q * x).cwiseProduct(x * m.H_x)).sum();
  const double control = ((m.R * u).cwiseProduct(u * m.H_u)).sum();
  return state + control;
}

}  // namespace netsde
