#ifndef SMCNUTS_SMC_HPP
#define SMCNUTS_SMC_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "smcnuts/hamiltonian.hpp"
#include "smcnuts/lkernel.hpp"
#include "smcnuts/nuts.hpp"
#include "smcnuts/target.hpp"
#include "smcnuts/types.hpp"

namespace smcnuts {

/// Raised when the ensemble cannot continue, e.g. every weight is zero.
class SmcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Particle {
  Vector x_prev;
  Vector x_curr;
  Vector p_initial;  // momentum drawn before the proposal, p_{k-1}
  Vector p_final;    // momentum at the selected leaf, p_k
  double log_density_prev = 0.0;
  double log_density_curr = 0.0;
  double log_w = 0.0;
  int step_index = 0;  // signed leapfrog offset of x_curr from x_prev
  bool divergent = false;
};

/// Initial proposal q0: independent Gaussian coordinates.
class GaussianInitial {
 public:
  GaussianInitial(Vector mean, Vector stddev);
  static GaussianInitial isotropic(const Vector &mean, double stddev = 1.0);

  Eigen::Index dim() const { return mean_.size(); }
  Vector sample(Rng &rng) const;
  double log_density(const Vector &x) const;

 private:
  Vector mean_;
  Vector stddev_;
  double log_norm_;
};

class Ensemble {
 public:
  std::vector<Particle> particles;
  std::vector<Rng> streams;  // one per particle slot
  Rng resample_rng;
  std::size_t iteration = 0;
  double resample_threshold = 0.5;

  std::size_t size() const { return particles.size(); }
  Eigen::Index dim() const { return particles.front().x_curr.size(); }
  std::vector<double> log_weights() const;
};

enum class ProposalKind { kNuts, kRandomWalk };
enum class ResamplingScheme { kSystematic, kMultinomial };

// kWithJacobians multiplies q and L by their finite-difference position /
// momentum Jacobian determinants. The factors cancel, so the weights agree
// with kProduction to finite-difference accuracy. Only useful in tests.
enum class WeightMode { kProduction, kWithJacobians };

struct ProposalConfig {
  ProposalKind kind = ProposalKind::kNuts;
  NutsConfig nuts;
  double rw_scale = 0.1;

  explicit ProposalConfig(NutsConfig n) : nuts(std::move(n)) {}
};

struct StepOptions {
  ResamplingScheme resampling = ResamplingScheme::kSystematic;
  WeightMode weight_mode = WeightMode::kProduction;
  std::size_t threads = 1;
};

struct StepReport {
  std::size_t iteration = 0;
  double ess = 0.0;
  bool resampled = false;
  Vector estimate;  // self-normalized mean before resampling
  std::uint64_t n_divergent = 0;
  std::uint64_t n_gradient_evals = 0;
};

/// Draws x ~ q0 into each slot and sets log w = log pi(x) - log q0(x).
Ensemble initialize(const TargetModel &model, const GaussianInitial &q0,
                    std::size_t n_particles, std::uint64_t seed,
                    double resample_threshold = 0.5);

struct Normalized {
  std::vector<double> weights;
  double ess = 0.0;
};

/// Log-sum-exp normalization and N_eff = 1 / sum w^2. Throws SmcError if no
/// log-weight is finite.
Normalized normalize_and_ess(std::span<const double> log_weights);

std::vector<std::size_t> systematic_resample(std::span<const double> weights,
                                             Rng &rng);
std::vector<std::size_t> multinomial_resample(std::span<const double> weights,
                                              Rng &rng);

/// Copies ancestors into every slot and resets log-weights to -log N.
void resample(Ensemble &ensemble, std::span<const double> weights,
              ResamplingScheme scheme);

/// Weighted mean of the current positions.
Vector weighted_mean(const Ensemble &ensemble, std::span<const double> weights);

/**
 * log of pi(x_k)/pi(x_{k-1}) * L(-p_k | x_k) / N(p_{k-1}; 0, M).
 *
 * A random-walk move uses L equal to the reversed proposal, so only the
 * target ratio remains; pass `lkernel == nullptr` for that case.
 */
double incremental_log_weight(const Particle &particle, const LKernel *lkernel,
                              const MassMatrix &mass);

/// Mutate, reweight, normalize and (maybe) resample one iteration.
StepReport smc_step(Ensemble &ensemble, const TargetModel &model,
                    const ProposalConfig &proposal, LKernel &lkernel,
                    const StepOptions &options = {});

/// Convex combination of per-iteration estimates with weights proportional
/// to each iteration's ESS.
Vector recycle(std::span<const Vector> estimates, std::span<const double> ess);

struct SmcConfig {
  std::size_t n_particles = 100;
  std::size_t n_iterations = 10;
  std::uint64_t seed = 1;
  ProposalConfig proposal;
  std::string lkernel = "symmetric";
  FitOptions fit;
  StepOptions step;
  double resample_threshold = 0.5;
  bool recycling = true;

  explicit SmcConfig(MassMatrix mass)
      : proposal(NutsConfig(std::move(mass))) {}
};

struct IterationTrace {
  std::size_t iteration;
  double ess;
  bool resampled;
  const Vector &estimate;
  const Vector &recycled;
};

using TraceSink = std::function<void(const IterationTrace &)>;

struct RunEstimates {
  std::vector<Vector> estimates;  // per iteration, before resampling
  std::vector<Vector> recycled;   // running recycled estimate
  std::vector<double> ess;
  std::vector<bool> resampled;
  std::uint64_t n_divergent = 0;
  std::uint64_t n_gradient_evals = 0;

  const Vector &final_estimate() const { return recycled.back(); }
};

/// Initialization plus n_iterations - 1 SMC steps; deterministic in seed.
RunEstimates run(const TargetModel &model, const GaussianInitial &q0,
                 const SmcConfig &config, const TraceSink &sink = {});

}  // namespace smcnuts

#endif  // SMCNUTS_SMC_HPP
