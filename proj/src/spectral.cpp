#include "netsde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace netsde {
namespace {

double polynomial_at(const std::vector<double>& coeffs, double x) {
  double value = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    value = value * x + *it;
  }
  return value;
}

// Magnitude scale of the polynomial evaluation, used to tell a genuinely
// positive weight from cancellation round-off.
double polynomial_scale(const std::vector<double>& coeffs, double x) {
  double value = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    value = value * std::abs(x) + std::abs(*it);
  }
  return value;
}

bool clearly_positive(const std::vector<double>& coeffs, double x,
                      double value) {
  return value > kCostPositivityTol * polynomial_scale(coeffs, x);
}

}  // namespace

bool SpectralBasis::aux_active(int i) const {
  return breve_v2(i) > kAuxDegeneracyTol;
}

SpectralBasis decompose_coupling(const NetworkModel& m, double rank_tol,
                                 AuxDegeneracy aux) {
  SpectralBasis basis;
  basis.n = m.n;
  basis.q0 = m.q_coeffs.front();
  basis.r0 = m.r_coeffs.front();

  Eigen::SelfAdjointEigenSolver<Matrix> es(m.M);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the coupling matrix failed");
  }
  const Vector& evals = es.eigenvalues();
  const double norm2 = evals.size() > 0 ? evals.cwiseAbs().maxCoeff() : 0.0;
  const double cutoff = rank_tol * std::max(1.0, norm2);

  std::vector<int> kept;
  for (int k = 0; k < evals.size(); ++k) {
    if (std::abs(evals(k)) > cutoff) kept.push_back(k);
  }
  // Descending eigenvalue order; the solver returns ascending.
  std::reverse(kept.begin(), kept.end());

  basis.L = static_cast<int>(kept.size());
  basis.lambdas.resize(basis.L);
  basis.V.resize(m.n, basis.L);
  basis.q_ell.resize(basis.L);
  basis.r_ell.resize(basis.L);
  basis.i_star.resize(basis.L);
  for (int l = 0; l < basis.L; ++l) {
    const int k = kept[l];
    Vector v = es.eigenvectors().col(k);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > best) {
        best = std::abs(v(i));
        arg = i;
      }
    }
    if (v(arg) < 0) v = -v;
    basis.lambdas(l) = evals(k);
    basis.V.col(l) = v;
    basis.i_star[l] = static_cast<int>(arg);
    basis.q_ell(l) = polynomial_at(m.q_coeffs, evals(k));
    basis.r_ell(l) = polynomial_at(m.r_coeffs, evals(k));
  }

  basis.breve_v2 =
      (Vector::Ones(m.n) - basis.V.rowwise().squaredNorm()).cwiseMax(0.0).cwiseMin(1.0);

  if (!(basis.q0 > 0.0) || !(basis.r0 > 0.0)) {
    std::ostringstream os;
    os << "q0=" << basis.q0 << ", r0=" << basis.r0 << " must be positive";
    throw AssumptionError("A3", os.str());
  }
  for (int l = 0; l < basis.L; ++l) {
    if (!clearly_positive(m.q_coeffs, basis.lambdas(l), basis.q_ell(l)) ||
        !clearly_positive(m.r_coeffs, basis.lambdas(l), basis.r_ell(l))) {
      std::ostringstream os;
      os << "eigenvalue " << basis.lambdas(l) << " gives q=" << basis.q_ell(l)
         << ", r=" << basis.r_ell(l);
      throw AssumptionError("A3", os.str());
    }
  }
  if (aux == AuxDegeneracy::kReject) {
    for (int i = 0; i < m.n; ++i) {
      if (!basis.aux_active(i)) {
        std::ostringstream os;
        os << "auxiliary weight of agent " << i << " is zero";
        throw AssumptionError("A5", os.str());
      }
    }
  }
  return basis;
}

Projection project_state(const SpectralBasis& basis, const Matrix& x) {
  Projection p;
  p.eigen.reserve(basis.L);
  p.aux = x;
  for (int l = 0; l < basis.L; ++l) {
    const auto v = basis.V.col(l);
    Matrix xl = (x * v) * v.transpose();
    p.aux -= xl;
    p.eigen.push_back(std::move(xl));
  }
  return p;
}

double DecomposedCost::weighted_total(const SpectralBasis& basis) const {
  double total = basis.q0 * aux.sum();
  for (int l = 0; l < basis.L; ++l) total += basis.q_ell(l) * eigen.row(l).sum();
  return total;
}

DecomposedCost decomposed_cost(const SpectralBasis& basis,
                               const NetworkModel& m, const Matrix& x,
                               const Matrix& u) {
  const Projection px = project_state(basis, x);
  const Projection pu = project_state(basis, u);
  auto quad = [](const Matrix& W, const Matrix& y) -> Vector {
    return (W * y).cwiseProduct(y).colwise().sum().transpose();
  };
  DecomposedCost c;
  c.aux = quad(m.Q, px.aux) + basis.aux_cost_ratio() * quad(m.R, pu.aux);
  c.eigen.resize(basis.L, m.n);
  for (int l = 0; l < basis.L; ++l) {
    c.eigen.row(l) = (quad(m.Q, px.eigen[l]) +
                      basis.eigen_cost_ratio(l) * quad(m.R, pu.eigen[l]))
                         .transpose();
  }
  return c;
}

double aux_noise_variance(const SpectralBasis& basis, const NetworkModel& m,
                          int i) {
  return basis.breve_v2(i) * m.sigma_w2;
}

double eigen_noise_variance(const SpectralBasis& basis, const NetworkModel& m,
                            int l, int i) {
  const double v = basis.V(i, l);
  return v * v * m.sigma_w2;
}

}  // namespace netsde
