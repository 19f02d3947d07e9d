#ifndef SMCNUTS_NUTS_HPP
#define SMCNUTS_NUTS_HPP

#include <cstdint>

#include "smcnuts/hamiltonian.hpp"
#include "smcnuts/target.hpp"
#include "smcnuts/types.hpp"

namespace smcnuts {

struct NutsConfig {
  double step_size = 0.1;
  int max_depth = 10;
  MassMatrix mass;

  explicit NutsConfig(MassMatrix m, double h = 0.1, int depth = 10)
      : step_size(h), max_depth(depth), mass(std::move(m)) {}

  void validate() const;
};

/**
 * Result of one No-U-Turn trajectory.
 *
 * `momentum` is the momentum at the selected leaf, in forward time, so the
 * leaf at signed offset `step_index` is reached from (x0, p0) by
 * |step_index| leapfrog steps of size sign(step_index) * h, and integrating
 * (position, -momentum) with the same signed step for the same count leads
 * back to x0.
 */
struct NutsOutcome {
  Vector position;
  Vector momentum;
  double log_density = 0.0;  // log pi(position)
  double log_slice = 0.0;    // slice level drawn for this trajectory
  int step_index = 0;
  int tree_depth = 0;
  std::uint64_t n_leapfrog = 0;
  std::uint64_t n_gradient_evals = 0;
  // A divergent trajectory returns the initial position and momentum.
  bool divergent = false;
};

/**
 * Slice-sampling No-U-Turn proposal with trajectory doubling.
 *
 * A slice level log u = log pi(x0) - K(p0) + log U(0,1) is drawn, the
 * trajectory is doubled in a random direction until a subtree or the whole
 * trajectory makes a U-turn, a leaf diverges, or max_depth doublings have
 * been made. The returned state is drawn from the leaves that lie inside the
 * slice: uniformly within each subtree and with probability min(1, n'/n)
 * when a new subtree is merged into the running trajectory.
 *
 * There is no Metropolis correction; the caller owns the weighting.
 */
NutsOutcome nuts_propose(const TargetModel &model, const Vector &x0,
                         const Vector &p0, const NutsConfig &cfg, Rng &rng);

}  // namespace smcnuts

#endif  // SMCNUTS_NUTS_HPP
