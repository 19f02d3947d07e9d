// smcnuts: run the SMC sampler experiments and generate regression data.
//
//   smcnuts run --config <file> [--n N] [--t T] [--seed S] [--lkernel K]
//               [--proposal P] [--out FILE] [--repeats R] [--threads W]
//   smcnuts gen-data --seed S --out <dir>
//
// Exit codes: 0 success, 1 sampler abort, 2 usage or configuration error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "smcnuts/dataset.hpp"

namespace {

constexpr int kExitAbort = 1;
constexpr int kExitUsage = 2;

struct RunOverrides {
  std::string config_path;
  std::optional<std::string> experiment;
  std::optional<std::size_t> n, t, repeats, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> lkernel, proposal, out;
  std::optional<double> step_size;
  bool timing = false;
};

int do_run(const RunOverrides &o) {
  using namespace smcnuts::cli;
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    j = config_to_json(load_config(o.config_path));
  }
  // Flags win over file values.
  if (o.experiment) {
    if (j.contains("experiment") && j["experiment"] != *o.experiment) {
      throw ConfigError("--experiment conflicts with the config file");
    }
    j["experiment"] = *o.experiment;
  }
  if (o.n) j["n"] = *o.n;
  if (o.t) j["t"] = *o.t;
  if (o.seed) j["seed"] = *o.seed;
  if (o.repeats) j["repeats"] = *o.repeats;
  if (o.threads) j["threads"] = *o.threads;
  if (o.lkernel) j["lkernel"] = *o.lkernel;
  if (o.proposal) j["proposal"] = *o.proposal;
  if (o.out) j["out"] = *o.out;
  if (o.step_size) j["step_size"] = *o.step_size;
  if (o.timing) j["timing"] = true;

  const ExperimentConfig cfg = config_from_json(j);
  const ExperimentResult result = run_experiment(cfg);
  const auto summary_path = write_results(result);
  const auto summary = result.summary();
  std::cout << "experiment " << cfg.experiment << ": " << cfg.repeats
            << " run(s), N=" << cfg.n << ", T=" << cfg.t << "\n"
            << "median final MSE " << summary["median_final_mse"].get<double>()
            << ", median runtime "
            << summary["median_runtime_ms"].get<double>() << " ms\n"
            << "rows -> " << cfg.out << "\nsummary -> "
            << summary_path.string() << "\n";
  return 0;
}

int do_gen_data(std::uint64_t seed, const std::filesystem::path &dir,
                std::size_t n_obs, double gamma, double z) {
  smcnuts::RegressionSetup setup;
  setup.seed = seed;
  setup.n_obs = n_obs;
  setup.prior_scale = gamma;
  setup.prior_shape = z;
  const auto data = smcnuts::generate_regression_dataset(setup);
  std::filesystem::create_directories(dir);
  smcnuts::write_dataset(data, dir / "data.csv", dir / "basis.json");
  std::cout << "wrote " << (dir / "data.csv").string() << " and "
            << (dir / "basis.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"SMC sampler with a No-U-Turn proposal"};
  app.require_subcommand(1);

  RunOverrides ov;
  auto *run_cmd = app.add_subcommand("run", "run an experiment");
  run_cmd->add_option("--config", ov.config_path, "JSON config file");
  run_cmd->add_option("--experiment", ov.experiment,
                      "student-t | poisson-lasso | gaussian-sanity");
  run_cmd->add_option("--n", ov.n, "number of particles");
  run_cmd->add_option("--t", ov.t, "number of iterations");
  run_cmd->add_option("--seed", ov.seed, "master seed");
  run_cmd->add_option("--repeats", ov.repeats, "independent seeded runs");
  run_cmd->add_option("--threads", ov.threads, "worker threads per run");
  run_cmd->add_option("--lkernel", ov.lkernel, "symmetric | near-optimal");
  run_cmd->add_option("--proposal", ov.proposal, "nuts | random-walk");
  run_cmd->add_option("--step-size", ov.step_size, "leapfrog step size");
  run_cmd->add_option("--out", ov.out, "output CSV path");
  run_cmd->add_flag("--timing", ov.timing, "write wall-clock ms into the CSV");

  std::uint64_t gen_seed = 1;
  std::string gen_out;
  std::size_t gen_n_obs = 100;
  double gen_gamma = 1.0, gen_z = 0.5;
  auto *gen_cmd = app.add_subcommand("gen-data", "write the regression data set");
  gen_cmd->add_option("--seed", gen_seed, "data seed")->required();
  gen_cmd->add_option("--out", gen_out, "output directory")->required();
  gen_cmd->add_option("--n-obs", gen_n_obs, "number of observations");
  gen_cmd->add_option("--gamma", gen_gamma, "prior scale");
  gen_cmd->add_option("--z", gen_z, "prior shape");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return do_run(ov);
    return do_gen_data(gen_seed, gen_out, gen_n_obs, gen_gamma, gen_z);
  } catch (const smcnuts::cli::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument &e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const smcnuts::SmcError &e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kExitAbort;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAbort;
  }
}
