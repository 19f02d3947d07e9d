#include "smcnuts/lkernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace smcnuts {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

double log_norm_from_chol(const Eigen::LLT<Matrix> &chol) {
  const Matrix &l = chol.matrixLLT();
  return -0.5 * static_cast<double>(l.rows()) * kLog2Pi -
         l.diagonal().array().log().sum();
}

}  // namespace

double symmetric_log_density(const Vector &p_k, const MassMatrix &mass) {
  return momentum_log_density(-p_k, mass);
}

double SymmetricLKernel::log_density(const Vector &neg_momentum,
                                     const Vector &) const {
  return momentum_log_density(neg_momentum, mass_);
}

JointGaussianFit fit_joint(std::span<const Vector> neg_momenta,
                           std::span<const Vector> positions,
                           const FitOptions &options,
                           std::span<const double> log_weights) {
  const std::size_t n = neg_momenta.size();
  if (n < 2 || positions.size() != n) {
    throw std::invalid_argument("fit_joint: need at least two (-p, x) pairs");
  }
  if (options.weighted && log_weights.size() != n) {
    throw std::invalid_argument("fit_joint: weighted fit needs one weight per pair");
  }
  const Eigen::Index d = neg_momenta[0].size();

  Vector w = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  if (options.weighted) {
    double max_lw = -std::numeric_limits<double>::infinity();
    for (double lw : log_weights) max_lw = std::max(max_lw, lw);
    if (!std::isfinite(max_lw)) {
      throw std::invalid_argument("fit_joint: no finite weights");
    }
    for (std::size_t i = 0; i < n; ++i) {
      w[static_cast<Eigen::Index>(i)] = std::exp(log_weights[i] - max_lw);
    }
    w /= w.sum();
  }

  Matrix stacked(2 * d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (neg_momenta[i].size() != d || positions[i].size() != d) {
      throw std::invalid_argument("fit_joint: inconsistent dimensions");
    }
    const auto col = static_cast<Eigen::Index>(i);
    stacked.col(col).head(d) = neg_momenta[i];
    stacked.col(col).tail(d) = positions[i];
  }
  if (!stacked.allFinite()) {
    throw std::invalid_argument("fit_joint: non-finite pair");
  }

  JointGaussianFit fit;
  fit.mean = stacked * w;
  const Matrix centred = stacked.colwise() - fit.mean;
  fit.covariance = centred * w.asDiagonal() * centred.transpose();
  fit.covariance = (0.5 * (fit.covariance + fit.covariance.transpose())).eval();

  const double mean_diag = fit.covariance.diagonal().mean();
  fit.jitter = options.jitter_scale * (mean_diag > 0.0 ? mean_diag : 1.0);
  fit.covariance.diagonal().array() += fit.jitter;
  return fit;
}

GaussianConditional::GaussianConditional(const JointGaussianFit &fit)
    : mean_p_(fit.mean_p()), mean_x_(fit.mean_x()) {
  const Eigen::LLT<Matrix> xx_chol(fit.cov_xx());
  if (xx_chol.info() != Eigen::Success) {
    throw std::runtime_error(
        "near-optimal L-kernel: position covariance is rank deficient; "
        "increase the jitter or the number of particles");
  }
  gain_ = xx_chol.solve(Matrix(fit.cov_xp())).transpose();
  cond_cov_ = fit.cov_pp() - gain_ * fit.cov_xp();
  cond_cov_ = (0.5 * (cond_cov_ + cond_cov_.transpose())).eval();
  cond_chol_.compute(cond_cov_);
  if (cond_chol_.info() != Eigen::Success) {
    throw std::runtime_error(
        "near-optimal L-kernel: conditional covariance is not positive "
        "definite");
  }
  log_norm_ = log_norm_from_chol(cond_chol_);
}

Vector GaussianConditional::mean(const Vector &position) const {
  return mean_p_ + gain_ * (position - mean_x_);
}

double GaussianConditional::log_density(const Vector &neg_momentum,
                                        const Vector &position) const {
  const Vector r = neg_momentum - mean(position);
  const Vector z = cond_chol_.matrixL().solve(r);
  return log_norm_ - 0.5 * z.squaredNorm();
}

double conditional_log_density(const JointGaussianFit &fit, const Vector &p_k,
                               const Vector &x_k) {
  return GaussianConditional(fit).log_density(-p_k, x_k);
}

double gaussian_log_density(const Vector &v, const Vector &mean,
                            const Matrix &cov) {
  const Eigen::LLT<Matrix> chol(cov);
  if (chol.info() != Eigen::Success) {
    throw std::runtime_error("gaussian_log_density: covariance not PD");
  }
  const Vector z = chol.matrixL().solve(v - mean);
  return log_norm_from_chol(chol) - 0.5 * z.squaredNorm();
}

void NearOptimalLKernel::prepare(std::span<const Vector> neg_momenta,
                                 std::span<const Vector> positions,
                                 std::span<const double> log_weights) {
  fit_ = fit_joint(neg_momenta, positions, options_, log_weights);
  conditional_.emplace(*fit_);
}

double NearOptimalLKernel::log_density(const Vector &neg_momentum,
                                       const Vector &position) const {
  if (!conditional_) {
    throw std::logic_error("NearOptimalLKernel: prepare() has not been called");
  }
  return conditional_->log_density(neg_momentum, position);
}

const JointGaussianFit &NearOptimalLKernel::fit() const {
  if (!fit_) {
    throw std::logic_error("NearOptimalLKernel: prepare() has not been called");
  }
  return *fit_;
}

std::unique_ptr<LKernel> make_lkernel(std::string_view name,
                                      const MassMatrix &mass,
                                      FitOptions options) {
  if (name == "symmetric") return std::make_unique<SymmetricLKernel>(mass);
  if (name == "near-optimal") {
    return std::make_unique<NearOptimalLKernel>(options);
  }
  throw std::invalid_argument("unknown L-kernel '" + std::string(name) +
                              "' (expected symmetric or near-optimal)");
}

}  // namespace smcnuts
