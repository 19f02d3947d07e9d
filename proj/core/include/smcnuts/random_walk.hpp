#ifndef SMCNUTS_RANDOM_WALK_HPP
#define SMCNUTS_RANDOM_WALK_HPP

#include <stdexcept>

#include "smcnuts/types.hpp"

namespace smcnuts {

// Gaussian random-walk move x' = x + scale * N(0, I). The kernel is
// symmetric, so with the reversed proposal as L-kernel the weight update is
// just the target ratio.
inline Vector random_walk_propose(const Vector &x, double scale, Rng &rng) {
  if (!(scale >= 0.0)) {
    throw std::invalid_argument("random_walk_propose: scale must be >= 0");
  }
  return x + scale * standard_normal_vector(rng, x.size());
}

}  // namespace smcnuts

#endif  // SMCNUTS_RANDOM_WALK_HPP
