#ifndef SMCNUTS_LKERNEL_HPP
#define SMCNUTS_LKERNEL_HPP

#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "smcnuts/hamiltonian.hpp"
#include "smcnuts/types.hpp"

namespace smcnuts {

/**
 * Backward kernel over the reversed final momentum.
 *
 * prepare() sees every particle's (-p_k, x_k) after the proposal step and
 * is the only non-const member; log_density() is read-only afterwards and
 * may be called concurrently. log_density() is a normalized density in -p_k
 * for every fixed x_k.
 */
class LKernel {
 public:
  virtual ~LKernel() = default;

  virtual void prepare(std::span<const Vector> neg_momenta,
                       std::span<const Vector> positions,
                       std::span<const double> log_weights) = 0;
  virtual double log_density(const Vector &neg_momentum,
                             const Vector &position) const = 0;
  virtual std::string_view name() const = 0;
};

/// log N(-p_k; 0, M), the reverse of the forward momentum draw.
double symmetric_log_density(const Vector &p_k, const MassMatrix &mass);

class SymmetricLKernel final : public LKernel {
 public:
  explicit SymmetricLKernel(MassMatrix mass) : mass_(std::move(mass)) {}

  void prepare(std::span<const Vector>, std::span<const Vector>,
               std::span<const double>) override {}
  double log_density(const Vector &neg_momentum,
                     const Vector &position) const override;
  std::string_view name() const override { return "symmetric"; }

 private:
  MassMatrix mass_;
};

/// Empirical Gaussian over the stacked vector (-p, x); blocks are views into
/// `covariance` with -p first.
struct JointGaussianFit {
  Vector mean;        // 2D
  Matrix covariance;  // 2D x 2D, jitter included
  double jitter = 0.0;

  Eigen::Index dim() const { return mean.size() / 2; }
  auto mean_p() const { return mean.head(dim()); }
  auto mean_x() const { return mean.tail(dim()); }
  auto cov_pp() const { return covariance.topLeftCorner(dim(), dim()); }
  auto cov_px() const { return covariance.topRightCorner(dim(), dim()); }
  auto cov_xp() const { return covariance.bottomLeftCorner(dim(), dim()); }
  auto cov_xx() const { return covariance.bottomRightCorner(dim(), dim()); }
};

struct FitOptions {
  // Diagonal jitter is jitter_scale * mean(diag(covariance)), or
  // jitter_scale itself if that mean is zero.
  double jitter_scale = 1e-6;
  bool weighted = false;
};

/**
 * Moment fit of the joint Gaussian, 1/N covariance convention.
 *
 * With `weighted` set, normalized exp(log_weights) replace the uniform 1/N
 * factors. Throws std::invalid_argument on fewer than two pairs or
 * non-finite data.
 */
JointGaussianFit fit_joint(std::span<const Vector> neg_momenta,
                           std::span<const Vector> positions,
                           const FitOptions &options = {},
                           std::span<const double> log_weights = {});

/// Distribution of -p given x under a joint fit.
class GaussianConditional {
 public:
  // Throws std::runtime_error if cov_xx or the conditional covariance is not
  // positive definite.
  explicit GaussianConditional(const JointGaussianFit &fit);

  Vector mean(const Vector &position) const;
  const Matrix &covariance() const { return cond_cov_; }
  double log_density(const Vector &neg_momentum, const Vector &position) const;

 private:
  Vector mean_p_;
  Vector mean_x_;
  Matrix gain_;  // Sigma_px Sigma_xx^{-1}
  Matrix cond_cov_;
  Eigen::LLT<Matrix> cond_chol_;
  double log_norm_;
};

/// log N(-p_k; mu_{-p|x}, Sigma_{-p|x}) at x_k under `fit`.
double conditional_log_density(const JointGaussianFit &fit, const Vector &p_k,
                               const Vector &x_k);

/// log N(v; mean, cov) for a dense covariance; used as an independent check
/// of the conditioning path.
double gaussian_log_density(const Vector &v, const Vector &mean,
                            const Matrix &cov);

class NearOptimalLKernel final : public LKernel {
 public:
  explicit NearOptimalLKernel(FitOptions options = {}) : options_(options) {}

  void prepare(std::span<const Vector> neg_momenta,
               std::span<const Vector> positions,
               std::span<const double> log_weights) override;
  double log_density(const Vector &neg_momentum,
                     const Vector &position) const override;
  std::string_view name() const override { return "near-optimal"; }

  const JointGaussianFit &fit() const;

 private:
  FitOptions options_;
  std::optional<JointGaussianFit> fit_;
  std::optional<GaussianConditional> conditional_;
};

/// "symmetric" or "near-optimal"; anything else throws std::invalid_argument.
std::unique_ptr<LKernel> make_lkernel(std::string_view name,
                                      const MassMatrix &mass,
                                      FitOptions options = {});

}  // namespace smcnuts

#endif  // SMCNUTS_LKERNEL_HPP
