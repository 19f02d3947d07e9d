#include "smcnuts/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "parallel.hpp"
#include "smcnuts/random_walk.hpp"

namespace smcnuts {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974ULL;
constexpr std::uint64_t kStreamTag = 0x70617274ULL;
constexpr std::uint64_t kResampleTag = 0x72657361ULL;

}  // namespace

// ------------------------------------------------------------ initial draw

GaussianInitial::GaussianInitial(Vector mean, Vector stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() == 0 || mean_.size() != stddev_.size()) {
    throw std::invalid_argument("GaussianInitial: mean/stddev size mismatch");
  }
  if ((stddev_.array() <= 0.0).any()) {
    throw std::invalid_argument("GaussianInitial: stddev must be positive");
  }
  log_norm_ = -0.5 * static_cast<double>(mean_.size()) *
                  std::log(2.0 * std::numbers::pi) -
              stddev_.array().log().sum();
}

GaussianInitial GaussianInitial::isotropic(const Vector &mean, double stddev) {
  return GaussianInitial(mean, Vector::Constant(mean.size(), stddev));
}

Vector GaussianInitial::sample(Rng &rng) const {
  return mean_ + stddev_.cwiseProduct(standard_normal_vector(rng, dim()));
}

double GaussianInitial::log_density(const Vector &x) const {
  return log_norm_ -
         0.5 * ((x - mean_).array() / stddev_.array()).square().sum();
}

// ---------------------------------------------------------------- ensemble

std::vector<double> Ensemble::log_weights() const {
  std::vector<double> lw(particles.size());
  std::transform(particles.begin(), particles.end(), lw.begin(),
                 [](const Particle &p) { return p.log_w; });
  return lw;
}

Ensemble initialize(const TargetModel &model, const GaussianInitial &q0,
                    std::size_t n_particles, std::uint64_t seed,
                    double resample_threshold) {
  if (n_particles < 2) throw std::invalid_argument("initialize: N must be >= 2");
  if (q0.dim() != model.dim()) {
    throw std::invalid_argument("initialize: q0 and target dimensions differ");
  }
  Ensemble ens{.particles = {},
               .streams = {},
               .resample_rng = make_stream(seed, kResampleTag),
               .iteration = 1,
               .resample_threshold = resample_threshold};
  ens.particles.resize(n_particles);
  ens.streams.reserve(n_particles);
  Rng init_rng = make_stream(seed, kInitTag);
  for (std::size_t i = 0; i < n_particles; ++i) {
    ens.streams.push_back(make_stream(seed, kStreamTag, i));
    Particle &pt = ens.particles[i];
    pt.x_curr = q0.sample(init_rng);
    pt.x_prev = pt.x_curr;
    pt.p_initial = Vector::Zero(model.dim());
    pt.p_final = pt.p_initial;
    pt.log_density_curr = model.log_density(pt.x_curr);
    pt.log_density_prev = pt.log_density_curr;
    pt.log_w = pt.log_density_curr - q0.log_density(pt.x_curr);
    if (std::isnan(pt.log_w)) pt.log_w = -std::numeric_limits<double>::infinity();
  }
  return ens;
}

// ------------------------------------------------------- weights and ESS

Normalized normalize_and_ess(std::span<const double> log_weights) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (!std::isnan(lw)) max_lw = std::max(max_lw, lw);
  }
  if (!std::isfinite(max_lw)) {
    throw SmcError("all particle weights are zero; the target is unreachable "
                   "from the current ensemble");
  }
  Normalized out;
  out.weights.resize(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double lw = log_weights[i];
    out.weights[i] = std::isnan(lw) ? 0.0 : std::exp(lw - max_lw);
    total += out.weights[i];
  }
  double sum_sq = 0.0;
  for (double &w : out.weights) {
    w /= total;
    sum_sq += w * w;
  }
  out.ess = 1.0 / sum_sq;
  return out;
}

// ------------------------------------------------------------- resampling

std::vector<std::size_t> systematic_resample(std::span<const double> weights,
                                             Rng &rng) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> ancestors(n);
  const double u0 = uniform01(rng);
  double cumulative = weights.empty() ? 0.0 : weights[0] * static_cast<double>(n);
  std::size_t i = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = static_cast<double>(j) + u0;
    while (u >= cumulative && i + 1 < n) {
      ++i;
      cumulative += weights[i] * static_cast<double>(n);
    }
    ancestors[j] = i;
  }
  return ancestors;
}

std::vector<std::size_t> multinomial_resample(std::span<const double> weights,
                                              Rng &rng) {
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::size_t> ancestors(weights.size());
  for (auto &a : ancestors) a = pick(rng);
  std::sort(ancestors.begin(), ancestors.end());
  return ancestors;
}

void resample(Ensemble &ensemble, std::span<const double> weights,
              ResamplingScheme scheme) {
  const auto ancestors = scheme == ResamplingScheme::kSystematic
                             ? systematic_resample(weights, ensemble.resample_rng)
                             : multinomial_resample(weights, ensemble.resample_rng);
  std::vector<Particle> next;
  next.reserve(ancestors.size());
  const double log_uniform = -std::log(static_cast<double>(ancestors.size()));
  for (std::size_t a : ancestors) {
    next.push_back(ensemble.particles[a]);
    next.back().log_w = log_uniform;
  }
  ensemble.particles = std::move(next);
}

Vector weighted_mean(const Ensemble &ensemble, std::span<const double> weights) {
  Vector mean = Vector::Zero(ensemble.dim());
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    if (weights[i] > 0.0) mean += weights[i] * ensemble.particles[i].x_curr;
  }
  return mean;
}

// ---------------------------------------------------------------- stepping

double incremental_log_weight(const Particle &particle, const LKernel *lkernel,
                              const MassMatrix &mass) {
  const double target_ratio =
      particle.log_density_curr - particle.log_density_prev;
  if (lkernel == nullptr) return target_ratio;
  return target_ratio +
         lkernel->log_density(-particle.p_final, particle.x_curr) -
         momentum_log_density(particle.p_initial, mass);
}

namespace {

// log |det dx_k/dp_{k-1}| - log |det dx_{k-1}/d(-p_k)|, zero for a
// particle that did not move.
double log_jacobian_ratio(const TargetModel &model, const Particle &pt,
                          const NutsConfig &cfg) {
  if (pt.step_index == 0) return 0.0;
  const double forward = position_momentum_jacobian_determinant(
      model, PhasePoint{pt.x_prev, pt.p_initial}, cfg.step_size, cfg.mass,
      pt.step_index);
  const double reverse = position_momentum_jacobian_determinant(
      model, PhasePoint{pt.x_curr, -pt.p_final}, cfg.step_size, cfg.mass,
      pt.step_index);
  return std::log(forward) - std::log(reverse);
}

}  // namespace

StepReport smc_step(Ensemble &ensemble, const TargetModel &model,
                    const ProposalConfig &proposal, LKernel &lkernel,
                    const StepOptions &options) {
  const std::size_t n = ensemble.size();
  const bool use_nuts = proposal.kind == ProposalKind::kNuts;
  if (use_nuts) proposal.nuts.validate();

  std::vector<std::uint64_t> grad_evals(n, 0);
  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    Particle &pt = ensemble.particles[i];
    Rng &rng = ensemble.streams[i];
    pt.x_prev = pt.x_curr;
    pt.log_density_prev = pt.log_density_curr;
    if (use_nuts) {
      pt.p_initial = sample_momentum(proposal.nuts.mass, rng);
      NutsOutcome out =
          nuts_propose(model, pt.x_prev, pt.p_initial, proposal.nuts, rng);
      pt.x_curr = std::move(out.position);
      pt.p_final = std::move(out.momentum);
      pt.log_density_curr = out.log_density;
      pt.step_index = out.step_index;
      pt.divergent = out.divergent;
      grad_evals[i] = out.n_gradient_evals;
    } else {
      pt.x_curr = random_walk_propose(pt.x_prev, proposal.rw_scale, rng);
      pt.log_density_curr = model.log_density(pt.x_curr);
      pt.step_index = 0;
      pt.divergent = false;
      grad_evals[i] = 0;
    }
  });

  const LKernel *kernel = nullptr;
  if (use_nuts) {
    std::vector<Vector> neg_momenta(n), positions(n);
    for (std::size_t i = 0; i < n; ++i) {
      neg_momenta[i] = -ensemble.particles[i].p_final;
      positions[i] = ensemble.particles[i].x_curr;
    }
    const auto lw = ensemble.log_weights();
    lkernel.prepare(neg_momenta, positions, lw);
    kernel = &lkernel;
  }

  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    Particle &pt = ensemble.particles[i];
    double inc = incremental_log_weight(pt, kernel, proposal.nuts.mass);
    if (use_nuts && options.weight_mode == WeightMode::kWithJacobians) {
      inc += log_jacobian_ratio(model, pt, proposal.nuts);
    }
    pt.log_w += std::isnan(inc) ? -std::numeric_limits<double>::infinity() : inc;
  });

  StepReport report;
  ensemble.iteration += 1;
  report.iteration = ensemble.iteration;
  for (std::size_t i = 0; i < n; ++i) {
    report.n_divergent += ensemble.particles[i].divergent ? 1 : 0;
    report.n_gradient_evals += grad_evals[i];
  }

  const Normalized norm = normalize_and_ess(ensemble.log_weights());
  report.ess = norm.ess;
  report.estimate = weighted_mean(ensemble, norm.weights);
  if (norm.ess < ensemble.resample_threshold * static_cast<double>(n)) {
    resample(ensemble, norm.weights, options.resampling);
    report.resampled = true;
  }
  return report;
}

Vector recycle(std::span<const Vector> estimates, std::span<const double> ess) {
  if (estimates.empty() || estimates.size() != ess.size()) {
    throw std::invalid_argument("recycle: need one ESS per estimate");
  }
  double total = 0.0;
  for (double e : ess) total += e;
  Vector out = Vector::Zero(estimates.front().size());
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    out += (ess[k] / total) * estimates[k];
  }
  return out;
}

RunEstimates run(const TargetModel &model, const GaussianInitial &q0,
                 const SmcConfig &config, const TraceSink &sink) {
  if (config.n_iterations < 1) {
    throw std::invalid_argument("run: need at least one iteration");
  }
  Ensemble ensemble = initialize(model, q0, config.n_particles, config.seed,
                                 config.resample_threshold);
  auto lkernel = make_lkernel(config.lkernel, config.proposal.nuts.mass,
                              config.fit);

  RunEstimates result;
  auto record = [&](std::size_t iteration, double ess, bool resampled,
                    Vector estimate) {
    result.estimates.push_back(std::move(estimate));
    result.ess.push_back(ess);
    result.resampled.push_back(resampled);
    result.recycled.push_back(config.recycling
                                  ? recycle(result.estimates, result.ess)
                                  : result.estimates.back());
    if (sink) {
      sink(IterationTrace{iteration, ess, resampled, result.estimates.back(),
                          result.recycled.back()});
    }
  };

  // The first iteration is plain importance sampling from q0; no resampling
  // happens until after the first mutation.
  {
    const Normalized norm = normalize_and_ess(ensemble.log_weights());
    record(1, norm.ess, false, weighted_mean(ensemble, norm.weights));
  }
  for (std::size_t k = 2; k <= config.n_iterations; ++k) {
    StepReport step =
        smc_step(ensemble, model, config.proposal, *lkernel, config.step);
    result.n_divergent += step.n_divergent;
    result.n_gradient_evals += step.n_gradient_evals;
    record(step.iteration, step.ess, step.resampled, std::move(step.estimate));
  }
  return result;
}

}  // namespace smcnuts
