#include "smcnuts/nuts.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace smcnuts {

void NutsConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("NutsConfig: step size must be positive");
  }
  if (max_depth < 1) {
    throw std::invalid_argument("NutsConfig: max_depth must be >= 1");
  }
}

namespace {

struct Edge {
  IntegratorState state;
  int index = 0;
};

struct Leaf {
  Vector x;
  Vector p;
  double log_density = 0.0;
  int index = 0;
};

struct Subtree {
  Edge minus;
  Edge plus;
  Leaf selected;
  std::uint64_t n_admissible = 0;
  bool keep_going = true;  // no U-turn inside and no divergence
  bool divergent = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const TargetModel &model, const NutsConfig &cfg, double log_slice,
              double h0, Rng &rng)
      : model_(model), cfg_(cfg), log_slice_(log_slice), h0_(h0), rng_(rng) {}

  Subtree build(const Edge &from, int direction, int depth) {
    if (depth == 0) return leaf(from, direction);

    Subtree first = build(from, direction, depth - 1);
    if (!first.keep_going) return first;

    const Edge &outer = direction < 0 ? first.minus : first.plus;
    Subtree second = build(outer, direction, depth - 1);
    if (second.divergent) return second;

    Subtree merged;
    if (direction < 0) {
      merged.minus = std::move(second.minus);
      merged.plus = std::move(first.plus);
    } else {
      merged.minus = std::move(first.minus);
      merged.plus = std::move(second.plus);
    }
    merged.n_admissible = first.n_admissible + second.n_admissible;
    // Uniform choice over admissible leaves of the two halves.
    if (merged.n_admissible > 0 &&
        uniform01(rng_) * static_cast<double>(merged.n_admissible) <
            static_cast<double>(second.n_admissible)) {
      merged.selected = std::move(second.selected);
    } else {
      merged.selected = std::move(first.selected);
    }
    merged.keep_going = second.keep_going && !is_uturn(merged.minus, merged.plus);
    return merged;
  }

  bool is_uturn(const Edge &minus, const Edge &plus) const {
    const Vector span = plus.state.point.x - minus.state.point.x;
    const Vector &inv = cfg_.mass.inverse();
    return span.dot(inv.cwiseProduct(minus.state.point.p)) < 0.0 ||
           span.dot(inv.cwiseProduct(plus.state.point.p)) < 0.0;
  }

  std::uint64_t n_leapfrog() const { return n_leapfrog_; }

 private:
  Subtree leaf(const Edge &from, int direction) {
    ++n_leapfrog_;
    LeapfrogOutcome step = leapfrog(model_, from.state,
                                    direction * cfg_.step_size, cfg_.mass);
    Subtree t;
    if (step.divergent) {
      t.divergent = true;
      t.keep_going = false;
      return t;
    }
    const double energy =
        hamiltonian(step.state.log_density, step.state.point.p, cfg_.mass);
    if (!std::isfinite(energy) || energy - h0_ > kDivergenceThreshold) {
      t.divergent = true;
      t.keep_going = false;
      return t;
    }
    t.n_admissible = log_slice_ <= -energy ? 1 : 0;
    t.selected = Leaf{step.state.point.x, step.state.point.p,
                      step.state.log_density, from.index + direction};
    t.minus.state = std::move(step.state);
    t.minus.index = from.index + direction;
    t.plus = t.minus;
    return t;
  }

  const TargetModel &model_;
  const NutsConfig &cfg_;
  double log_slice_;
  double h0_;
  Rng &rng_;
  std::uint64_t n_leapfrog_ = 0;
};

}  // namespace

NutsOutcome nuts_propose(const TargetModel &model, const Vector &x0,
                         const Vector &p0, const NutsConfig &cfg, Rng &rng) {
  cfg.validate();
  if (x0.size() != model.dim() || p0.size() != model.dim() ||
      cfg.mass.dim() != model.dim()) {
    throw std::invalid_argument("nuts_propose: dimension mismatch");
  }

  IntegratorState init = make_integrator_state(model, PhasePoint{x0, p0});
  const double init_log_density = init.log_density;
  const double h0 = hamiltonian(init_log_density, p0, cfg.mass);
  if (!std::isfinite(h0)) {
    throw std::domain_error("nuts_propose: initial state has non-finite energy");
  }
  // 1 - U keeps the argument of log in (0, 1].
  const double log_slice = -h0 + std::log1p(-uniform01(rng));

  NutsOutcome out;
  out.position = x0;
  out.momentum = p0;
  out.log_density = init_log_density;
  out.log_slice = log_slice;

  TreeBuilder builder(model, cfg, log_slice, h0, rng);
  Edge minus{init, 0};
  Edge plus{std::move(init), 0};
  std::uint64_t n_admissible = 1;  // the initial point is always in the slice

  while (out.tree_depth < cfg.max_depth) {
    const int direction = uniform01(rng) < 0.5 ? -1 : 1;
    Subtree sub = builder.build(direction < 0 ? minus : plus, direction,
                                out.tree_depth);
    ++out.tree_depth;

    if (sub.divergent) {
      out.position = x0;
      out.momentum = p0;
      out.log_density = init_log_density;
      out.step_index = 0;
      out.divergent = true;
      break;
    }

    if (sub.keep_going && sub.n_admissible > 0) {
      const double accept = static_cast<double>(sub.n_admissible) /
                            static_cast<double>(n_admissible);
      if (accept >= 1.0 || uniform01(rng) < accept) {
        out.position = std::move(sub.selected.x);
        out.momentum = std::move(sub.selected.p);
        out.log_density = sub.selected.log_density;
        out.step_index = sub.selected.index;
      }
    }
    n_admissible += sub.n_admissible;

    if (!sub.keep_going) break;
    if (direction < 0) {
      minus = std::move(sub.minus);
    } else {
      plus = std::move(sub.plus);
    }
    if (builder.is_uturn(minus, plus)) break;
  }

  out.n_leapfrog = builder.n_leapfrog();
  out.n_gradient_evals = out.n_leapfrog + 1;
  return out;
}

}  // namespace smcnuts
