#include "netsde/bayes.hpp"

#include <cmath>
#include <limits>

#include "netsde/json_io.hpp"

namespace netsde {
namespace {

// Square-root factor F with F F' = Sigma; tolerates PSD (point-mass) input.
Matrix covariance_factor(const Matrix& Sigma) {
  Eigen::LLT<Matrix> llt(Sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Sigma);
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

PosteriorState::PosteriorState(Matrix mu, Matrix Sigma, BlockTag tag)
    : mu_(std::move(mu)), Sigma_(std::move(Sigma)), tag_(tag) {
  if (Sigma_.rows() != mu_.rows() || Sigma_.cols() != mu_.rows()) {
    throw ConfigError("prior", "covariance must be (dx+du) x (dx+du)");
  }
  if ((Sigma_ - Sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("prior", "covariance must be symmetric");
  }
  Eigen::LLT<Matrix> llt(Sigma_);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("prior", "covariance must be positive definite");
  }
  det_ = Sigma_.determinant();
}

PosteriorState PosteriorState::point_mass(Matrix mu, BlockTag tag) {
  PosteriorState p;
  const auto dz = mu.rows();
  p.mu_ = std::move(mu);
  p.Sigma_ = Matrix::Zero(dz, dz);
  p.det_ = 0.0;
  p.tag_ = tag;
  return p;
}

void PosteriorState::update(const Observation& obs) {
  const Vector Sz = Sigma_ * obs.z;
  const double denom = obs.sigma2 + obs.z.dot(Sz);
  // Noiseless observation of a direction the posterior is already certain
  // about: nothing to learn.
  if (!(denom > 0.0)) return;
  const Vector innovation = obs.x_next - mu_.transpose() * obs.z;
  mu_.noalias() += Sz * (innovation.transpose() / denom);
  Sigma_.noalias() -= Sz * (Sz.transpose() / denom);
  det_ *= obs.sigma2 / denom;
  ++updates_;
  if (updates_ % kResyncInterval == 0) resync();
}

void PosteriorState::resync() {
  Sigma_ = 0.5 * (Sigma_ + Sigma_.transpose());
  const double fresh = Sigma_.determinant();
  const double scale = std::max(std::abs(fresh), std::numeric_limits<double>::min());
  if (std::abs(fresh - det_) > kDetResyncTol * scale) det_ = fresh;
}

PosteriorState posterior_update(PosteriorState p, const Observation& obs) {
  p.update(obs);
  return p;
}

bool in_set(const ThetaBlock& theta, const UncertaintySet& set) {
  if (!theta.A.allFinite() || !theta.B.allFinite()) return false;
  Matrix G;
  try {
    G = solve_block(theta, set.Q, set.R, set.cost_ratio, set.dare).G;
  } catch (const NumericError&) {
    return false;
  }
  const ThetaBlock& ref = set.nominal ? *set.nominal : theta;
  return spectral_radius(ref.A + ref.B * G) <= set.delta;
}

ThetaBlock sample_posterior(const PosteriorState& p, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix F = covariance_factor(p.Sigma());
  Matrix xi(p.dz(), p.dx());
  for (Eigen::Index k = 0; k < xi.cols(); ++k) {
    for (Eigen::Index r = 0; r < xi.rows(); ++r) xi(r, k) = normal(rng);
  }
  return ThetaBlock::from_theta(p.mu() + F * xi, p.dx(), p.tag());
}

TruncatedSample sample_truncated(const PosteriorState& p,
                                 const UncertaintySet& set, Rng& rng,
                                 int max_rejects, const ThetaBlock& fallback) {
  TruncatedSample out{fallback, false, 0};
  for (int attempt = 0; attempt < max_rejects; ++attempt) {
    ThetaBlock draw = sample_posterior(p, rng);
    if (in_set(draw, set)) {
      out.theta = std::move(draw);
      out.accepted = true;
      return out;
    }
    ++out.rejections;
  }
  return out;
}

int select_agent(const PosteriorState& p_aux, const Matrix& z_all,
                 const Vector& sigma2_all) {
  int best = -1;
  double best_score = -1.0;
  const Matrix Sz = p_aux.Sigma() * z_all;
  for (Eigen::Index i = 0; i < z_all.cols(); ++i) {
    if (!(sigma2_all(i) > 0.0)) continue;
    const double score = z_all.col(i).dot(Sz.col(i)) / sigma2_all(i);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

nlohmann::json to_json(const PosteriorState& p) {
  return {{"block", p.tag().name()},
          {"updates", p.update_count()},
          {"det", p.det()},
          {"mu", matrix_to_json(p.mu())},
          {"Sigma", matrix_to_json(p.Sigma())}};
}

}  // namespace netsde
