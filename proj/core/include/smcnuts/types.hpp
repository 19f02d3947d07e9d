#ifndef SMCNUTS_TYPES_HPP
#define SMCNUTS_TYPES_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace smcnuts {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Every particle, repeat and resampling step owns one of these; there is no
// shared global generator.
using Rng = std::mt19937_64;

// Derives an independent stream from a master seed and a pair of stream
// coordinates (e.g. particle index and purpose tag).
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t a,
                       std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

inline double standard_normal(Rng &rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double uniform01(Rng &rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline Vector standard_normal_vector(Rng &rng, Eigen::Index dim) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = standard_normal(rng);
  return v;
}

}  // namespace smcnuts

#endif  // SMCNUTS_TYPES_HPP
