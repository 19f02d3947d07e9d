#include "smcnuts/target.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace smcnuts {

void TargetModel::check_input(const Vector &x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("target: expected dimension " +
                                std::to_string(dim()) + ", got " +
                                std::to_string(x.size()));
  }
  if (!x.allFinite()) {
    throw std::domain_error("target: non-finite input coordinate");
  }
}

// ---------------------------------------------------------------- Gaussian

GaussianTarget::GaussianTarget(Vector mean, Vector variance)
    : mean_(std::move(mean)), variance_(std::move(variance)) {
  if (mean_.size() == 0 || mean_.size() != variance_.size()) {
    throw std::invalid_argument("GaussianTarget: mean/variance size mismatch");
  }
  if ((variance_.array() <= 0.0).any() || !variance_.allFinite()) {
    throw std::invalid_argument("GaussianTarget: variances must be positive");
  }
  log_norm_ = -0.5 * static_cast<double>(mean_.size()) *
                  std::log(2.0 * std::numbers::pi) -
              0.5 * variance_.array().log().sum();
}

double GaussianTarget::log_density(const Vector &x) const {
  check_input(x);
  return log_norm_ -
         0.5 * ((x - mean_).array().square() / variance_.array()).sum();
}

Vector GaussianTarget::grad_log_density(const Vector &x) const {
  check_input(x);
  return -((x - mean_).array() / variance_.array()).matrix();
}

double GaussianTarget::log_density_and_gradient(const Vector &x,
                                                Vector &grad) const {
  check_input(x);
  Vector r = x - mean_;
  grad = -(r.array() / variance_.array()).matrix();
  return log_norm_ - 0.5 * (r.array().square() / variance_.array()).sum();
}

// ---------------------------------------------------------------- Student-t

double student_t_log_normalizer(double dof) {
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi);
}

StudentTTarget::StudentTTarget(double dof, Vector mean)
    : dof_(dof), mean_(std::move(mean)) {
  if (!(dof_ > 0.0) || !std::isfinite(dof_)) {
    throw std::invalid_argument("StudentTTarget: dof must be positive");
  }
  if (mean_.size() == 0) {
    throw std::invalid_argument("StudentTTarget: empty mean");
  }
  log_norm_1d_ = student_t_log_normalizer(dof_);
}

double StudentTTarget::log_density(const Vector &x) const {
  check_input(x);
  const double power = -0.5 * (dof_ + 1.0);
  double lp = static_cast<double>(mean_.size()) * log_norm_1d_;
  for (Eigen::Index d = 0; d < mean_.size(); ++d) {
    const double r = x[d] - mean_[d];
    lp += power * std::log1p(r * r / dof_);
  }
  return lp;
}

Vector StudentTTarget::grad_log_density(const Vector &x) const {
  Vector g;
  log_density_and_gradient(x, g);
  return g;
}

double StudentTTarget::log_density_and_gradient(const Vector &x,
                                                Vector &grad) const {
  check_input(x);
  const double power = -0.5 * (dof_ + 1.0);
  double lp = static_cast<double>(mean_.size()) * log_norm_1d_;
  grad.resize(mean_.size());
  for (Eigen::Index d = 0; d < mean_.size(); ++d) {
    const double r = x[d] - mean_[d];
    lp += power * std::log1p(r * r / dof_);
    grad[d] = -(dof_ + 1.0) * r / (dof_ + r * r);
  }
  return lp;
}

// ------------------------------------------------------------ PoissonLasso

PoissonLassoTarget::PoissonLassoTarget(std::vector<std::uint64_t> counts,
                                       Matrix basis, double prior_scale,
                                       double prior_shape)
    : basis_(std::move(basis)), gamma_(prior_scale), z_(prior_shape) {
  if (counts.empty() || static_cast<Eigen::Index>(counts.size()) !=
                            basis_.rows()) {
    throw std::invalid_argument(
        "PoissonLassoTarget: counts and basis rows disagree");
  }
  if (basis_.cols() == 0 || !basis_.allFinite()) {
    throw std::invalid_argument("PoissonLassoTarget: invalid basis matrix");
  }
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw std::invalid_argument("PoissonLassoTarget: prior scale must be > 0");
  }
  if (!(z_ > 0.0) || !std::isfinite(z_)) {
    throw std::invalid_argument("PoissonLassoTarget: prior shape must be > 0");
  }
  counts_.resize(static_cast<Eigen::Index>(counts.size()));
  log_factorial_sum_ = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double y = static_cast<double>(counts[i]);
    counts_[static_cast<Eigen::Index>(i)] = y;
    log_factorial_sum_ += std::lgamma(y + 1.0);
  }
  log_prior_const_ = std::log(z_ / (2.0 * gamma_ * std::tgamma(1.0 / z_)));
}

Vector PoissonLassoTarget::linear_predictor(const Vector &beta) const {
  return (basis_ * beta.tail(basis_.cols())).array() + beta[0];
}

double PoissonLassoTarget::log_prior(const Vector &beta) const {
  double lp = static_cast<double>(basis_.cols()) * log_prior_const_;
  for (Eigen::Index j = 1; j < beta.size(); ++j) {
    lp -= std::pow(std::abs(beta[j] / gamma_), z_);
  }
  return lp;
}

double PoissonLassoTarget::log_density(const Vector &beta) const {
  check_input(beta);
  const Vector eta = linear_predictor(beta);
  const double loglik =
      counts_.dot(eta) - eta.array().exp().sum() - log_factorial_sum_;
  return loglik + log_prior(beta);
}

Vector PoissonLassoTarget::grad_log_density(const Vector &beta) const {
  Vector g;
  log_density_and_gradient(beta, g);
  return g;
}

double PoissonLassoTarget::log_density_and_gradient(const Vector &beta,
                                                    Vector &grad) const {
  check_input(beta);
  const Vector eta = linear_predictor(beta);
  const Vector rate = eta.array().exp();
  const Vector resid = counts_ - rate;

  grad.resize(beta.size());
  grad[0] = resid.sum();
  grad.tail(basis_.cols()).noalias() = basis_.transpose() * resid;

  for (Eigen::Index j = 1; j < beta.size(); ++j) {
    const double b = beta[j];
    if (b == 0.0) {
      // d/db |b|^z is 0 at b=0 for z>1 and undefined otherwise; take the
      // subgradient midpoint.
      if (z_ <= 1.0) subgradient_hits_.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    const double a = std::abs(b) / gamma_;
    grad[j] -= std::copysign(z_ / gamma_ * std::pow(a, z_ - 1.0), b);
  }
  return counts_.dot(eta) - rate.sum() - log_factorial_sum_ + log_prior(beta);
}

}  // namespace smcnuts
