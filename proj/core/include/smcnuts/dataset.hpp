#ifndef SMCNUTS_DATASET_HPP
#define SMCNUTS_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "smcnuts/types.hpp"

namespace smcnuts {

// Coefficients used to simulate the count data: intercept 1, then the 11
// basis coefficients with non-zeros at positions 2, 4, 6, 7 and 9.
Vector default_true_coefficients();

struct RegressionSetup {
  std::uint64_t seed = 1;
  std::size_t n_obs = 100;
  std::size_t n_basis = 11;
  double width = 0.5;
  Vector beta_true = default_true_coefficients();
  // Prior parameters travel with the data in the sidecar file.
  double prior_scale = 1.0;
  double prior_shape = 0.5;
};

struct RegressionDataset {
  std::vector<double> inputs;         // x_obs, one per observation
  std::vector<std::uint64_t> counts;  // y
  Vector centres;
  Vector widths;
  Matrix basis;  // n_obs x n_basis
  Vector beta_true;
  double prior_scale = 1.0;
  double prior_shape = 0.5;
  std::uint64_t seed = 0;
};

/// Phi(i, j) = exp(-(x_i - c_j)^2 / (2 r_j^2)).
Matrix gaussian_basis(const std::vector<double> &inputs, const Vector &centres,
                      const Vector &widths);

/// Equispaced centres over [lo, hi]; a single centre sits at the midpoint.
Vector equispaced_centres(double lo, double hi, std::size_t count);

/**
 * Simulates the penalized count-regression data set.
 *
 * Inputs are uniform on [0, 1]; centres are equispaced over the observed
 * input range; counts are Poisson with log-rate beta_0 + Phi * beta_{1..J}.
 * The output is a pure function of `setup`.
 */
RegressionDataset generate_regression_dataset(const RegressionSetup &setup);

// CSV (columns x,y) plus a JSON sidecar with centres, widths, z, gamma,
// beta_true and seed. The basis matrix is rebuilt on load.
void write_dataset(const RegressionDataset &data,
                   const std::filesystem::path &csv_path,
                   const std::filesystem::path &json_path);
RegressionDataset read_dataset(const std::filesystem::path &csv_path,
                               const std::filesystem::path &json_path);

}  // namespace smcnuts

#endif  // SMCNUTS_DATASET_HPP
