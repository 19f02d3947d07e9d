#ifndef SMCNUTS_TOOLS_EXPERIMENT_HPP
#define SMCNUTS_TOOLS_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smcnuts/smc.hpp"

namespace smcnuts::cli {

/// Bad configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment = "student-t";  // student-t | poisson-lasso | gaussian-sanity
  std::size_t n = 200;
  std::size_t t = 50;
  std::uint64_t seed = 1;
  std::size_t repeats = 1;
  double step_size = 0.1;
  int max_depth = 10;
  std::string lkernel = "symmetric";
  std::string proposal = "nuts";
  std::string resampling = "systematic";
  bool recycling = true;
  bool weighted_fit = false;
  std::size_t threads = 1;

  // Target parameters. `mu` is the Student-t location or the Gaussian mean.
  double nu = 5.0;
  std::vector<double> mu = {0.0, 2.0, 4.0, 6.0, 8.0};
  double z = 0.5;
  double gamma = 1.0;
  std::size_t n_obs = 100;
  std::optional<std::uint64_t> data_seed;  // defaults to the repeat's seed

  // q0 = N(offset * 1, init_scale^2 I).
  double offset = 5.0;
  double init_scale = 1.0;
  double rw_scale = 0.1;

  std::string out = "results.csv";
  bool timing = false;  // write wall-clock ms into the CSV

  void validate() const;
};

/// Defaults for `experiment`, overlaid with the keys present in `j`.
ExperimentConfig config_from_json(const nlohmann::json &j);
ExperimentConfig load_config(const std::filesystem::path &path);
nlohmann::json config_to_json(const ExperimentConfig &cfg);

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  double ess = 0.0;
  bool resampled = false;
  std::vector<double> estimate;
  std::vector<double> recycled;
  std::vector<double> abs_error;  // |recycled - truth|
  double mse = 0.0;               // mean over dims of squared recycled error
  double wall_ms = 0.0;

  bool operator==(const ResultRow &) const = default;
};

struct RunSummary {
  std::uint64_t seed = 0;
  double final_mse = 0.0;
  double runtime_ms = 0.0;
  std::uint64_t n_divergent = 0;
  std::uint64_t n_gradient_evals = 0;
  std::vector<double> final_recycled;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<double> truth;
  std::vector<ResultRow> rows;  // ordered by (seed, iteration)
  std::vector<RunSummary> runs;

  nlohmann::json summary() const;
};

/// Executes cfg.repeats seeded runs (seeds cfg.seed, cfg.seed + 1, ...).
/// Throws ConfigError for invalid configs and SmcError if a run aborts.
ExperimentResult run_experiment(const ExperimentConfig &cfg);

void write_csv(std::ostream &os, const std::vector<ResultRow> &rows);
std::vector<ResultRow> read_csv(std::istream &is);

/// Writes the CSV to cfg.out and the summary JSON next to it.
std::filesystem::path write_results(const ExperimentResult &result);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

}  // namespace smcnuts::cli

#endif  // SMCNUTS_TOOLS_EXPERIMENT_HPP
