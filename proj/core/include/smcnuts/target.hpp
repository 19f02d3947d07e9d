#ifndef SMCNUTS_TARGET_HPP
#define SMCNUTS_TARGET_HPP

#include <atomic>
#include <cstdint>
#include <vector>

#include "smcnuts/types.hpp"

namespace smcnuts {

/**
 * @brief Differentiable log-density of a target distribution on R^D.
 *
 * Implementations are immutable after construction and may be evaluated
 * concurrently. The log-density may omit an additive constant, but the
 * omitted constant is fixed for the lifetime of the instance. Non-finite
 * input coordinates raise std::domain_error; a length mismatch raises
 * std::invalid_argument.
 */
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double log_density(const Vector &x) const = 0;
  virtual Vector grad_log_density(const Vector &x) const = 0;

  // Fused evaluation used on the hot path of the integrator. The default
  // simply calls both members.
  virtual double log_density_and_gradient(const Vector &x, Vector &grad) const {
    grad = grad_log_density(x);
    return log_density(x);
  }

 protected:
  void check_input(const Vector &x) const;
};

/// Independent Gaussian with diagonal covariance, normalizing constant kept.
class GaussianTarget final : public TargetModel {
 public:
  GaussianTarget(Vector mean, Vector variance);

  Eigen::Index dim() const override { return mean_.size(); }
  double log_density(const Vector &x) const override;
  Vector grad_log_density(const Vector &x) const override;
  double log_density_and_gradient(const Vector &x,
                                  Vector &grad) const override;

  const Vector &mean() const { return mean_; }
  const Vector &variance() const { return variance_; }

 private:
  Vector mean_;
  Vector variance_;
  double log_norm_;
};

/// Product of unit-scale Student-t densities, coordinate d centred at mean[d].
class StudentTTarget final : public TargetModel {
 public:
  StudentTTarget(double dof, Vector mean);

  Eigen::Index dim() const override { return mean_.size(); }
  double log_density(const Vector &x) const override;
  Vector grad_log_density(const Vector &x) const override;
  double log_density_and_gradient(const Vector &x,
                                  Vector &grad) const override;

  double dof() const { return dof_; }
  const Vector &mean() const { return mean_; }

 private:
  double dof_;
  Vector mean_;
  double log_norm_1d_;
};

/**
 * Poisson count regression on a Gaussian-kernel basis with an
 * exponential-power (bridge) prior on the basis coefficients.
 *
 * Coordinate 0 of the parameter vector is the intercept and is not
 * penalized; coordinates 1..J multiply the J basis columns of `basis`.
 *
 * For shape <= 1 the prior is not differentiable at a zero coefficient. The
 * gradient reports 0 there and bumps subgradient_hits().
 */
class PoissonLassoTarget final : public TargetModel {
 public:
  PoissonLassoTarget(std::vector<std::uint64_t> counts, Matrix basis,
                     double prior_scale, double prior_shape);

  Eigen::Index dim() const override { return basis_.cols() + 1; }
  double log_density(const Vector &beta) const override;
  Vector grad_log_density(const Vector &beta) const override;
  double log_density_and_gradient(const Vector &beta,
                                  Vector &grad) const override;

  const Matrix &basis() const { return basis_; }
  double prior_scale() const { return gamma_; }
  double prior_shape() const { return z_; }
  std::uint64_t subgradient_hits() const {
    return subgradient_hits_.load(std::memory_order_relaxed);
  }

 private:
  Vector linear_predictor(const Vector &beta) const;
  double log_prior(const Vector &beta) const;

  Vector counts_;
  Matrix basis_;
  double gamma_;
  double z_;
  double log_factorial_sum_;
  double log_prior_const_;
  mutable std::atomic<std::uint64_t> subgradient_hits_{0};
};

/// log Gamma((nu+1)/2) - log Gamma(nu/2) - 0.5 log(nu pi).
double student_t_log_normalizer(double dof);

}  // namespace smcnuts

#endif  // SMCNUTS_TARGET_HPP
