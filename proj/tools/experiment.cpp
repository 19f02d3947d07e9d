#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "smcnuts/dataset.hpp"
#include "smcnuts/target.hpp"

namespace smcnuts::cli {

namespace {

ExperimentConfig defaults_for(const std::string &experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "student-t") {
    cfg.n = 200;
    cfg.t = 50;
    cfg.mu = {0.0, 2.0, 4.0, 6.0, 8.0};
    cfg.offset = 5.0;
  } else if (experiment == "poisson-lasso") {
    cfg.n = 50;
    cfg.t = 100;
    cfg.mu.clear();
    cfg.offset = 0.0;
  } else if (experiment == "gaussian-sanity") {
    cfg.n = 200;
    cfg.t = 20;
    cfg.mu = {1.0, -1.0};
    cfg.offset = 0.0;
    cfg.init_scale = 2.0;
  } else {
    throw ConfigError("unknown experiment '" + experiment +
                      "' (expected student-t, poisson-lasso or gaussian-sanity)");
  }
  return cfg;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view field) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::runtime_error("csv: bad numeric field '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Vector to_eigen(const std::vector<double> &v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Vector &v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

struct Problem {
  std::unique_ptr<TargetModel> target;
  Vector truth;
  Vector init_mean;
};

Problem build_problem(const ExperimentConfig &cfg, std::uint64_t seed) {
  Problem pb;
  if (cfg.experiment == "student-t") {
    pb.truth = to_eigen(cfg.mu);
    pb.target = std::make_unique<StudentTTarget>(cfg.nu, pb.truth);
  } else if (cfg.experiment == "gaussian-sanity") {
    pb.truth = to_eigen(cfg.mu);
    pb.target = std::make_unique<GaussianTarget>(
        pb.truth, Vector::Ones(pb.truth.size()));
  } else {
    RegressionSetup setup;
    setup.seed = cfg.data_seed.value_or(seed);
    setup.n_obs = cfg.n_obs;
    setup.prior_scale = cfg.gamma;
    setup.prior_shape = cfg.z;
    RegressionDataset data = generate_regression_dataset(setup);
    pb.truth = data.beta_true;
    pb.target = std::make_unique<PoissonLassoTarget>(
        std::move(data.counts), std::move(data.basis), cfg.gamma, cfg.z);
  }
  pb.init_mean = Vector::Constant(pb.target->dim(), cfg.offset);
  return pb;
}

}  // namespace

void ExperimentConfig::validate() const {
  (void)defaults_for(experiment);
  if (n < 2) throw ConfigError("n must be >= 2");
  if (t < 1) throw ConfigError("t must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (!(step_size > 0.0)) throw ConfigError("step_size must be > 0");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (lkernel != "symmetric" && lkernel != "near-optimal") {
    throw ConfigError("lkernel must be symmetric or near-optimal");
  }
  if (proposal != "nuts" && proposal != "random-walk") {
    throw ConfigError("proposal must be nuts or random-walk");
  }
  if (resampling != "systematic" && resampling != "multinomial") {
    throw ConfigError("resampling must be systematic or multinomial");
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be > 0");
  if (!(rw_scale >= 0.0)) throw ConfigError("rw_scale must be >= 0");
  if (experiment == "student-t") {
    if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
    if (mu.empty()) throw ConfigError("mu must be non-empty");
  } else if (experiment == "gaussian-sanity") {
    if (mu.empty()) throw ConfigError("mu must be non-empty");
  } else {
    if (!(z > 0.0 && z < 2.0)) throw ConfigError("z must lie in (0, 2)");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (n_obs < 1) throw ConfigError("n_obs must be >= 1");
  }
}

ExperimentConfig config_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg =
      defaults_for(j.value("experiment", std::string("student-t")));
  try {
    for (const auto &[key, value] : j.items()) {
      if (key == "experiment") continue;
      else if (key == "n") cfg.n = value.get<std::size_t>();
      else if (key == "t") cfg.t = value.get<std::size_t>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "repeats") cfg.repeats = value.get<std::size_t>();
      else if (key == "step_size") cfg.step_size = value.get<double>();
      else if (key == "max_depth") cfg.max_depth = value.get<int>();
      else if (key == "lkernel") cfg.lkernel = value.get<std::string>();
      else if (key == "proposal") cfg.proposal = value.get<std::string>();
      else if (key == "resampling") cfg.resampling = value.get<std::string>();
      else if (key == "recycling") cfg.recycling = value.get<bool>();
      else if (key == "weighted_fit") cfg.weighted_fit = value.get<bool>();
      else if (key == "threads") cfg.threads = value.get<std::size_t>();
      else if (key == "nu") cfg.nu = value.get<double>();
      else if (key == "mu") cfg.mu = value.get<std::vector<double>>();
      else if (key == "z") cfg.z = value.get<double>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "n_obs") cfg.n_obs = value.get<std::size_t>();
      else if (key == "data_seed") {
        if (value.is_null()) cfg.data_seed.reset();
        else cfg.data_seed = value.get<std::uint64_t>();
      }
      else if (key == "offset") cfg.offset = value.get<double>();
      else if (key == "init_scale") cfg.init_scale = value.get<double>();
      else if (key == "rw_scale") cfg.rw_scale = value.get<double>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "timing") cfg.timing = value.get<bool>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
}

nlohmann::json config_to_json(const ExperimentConfig &cfg) {
  nlohmann::json j = {
      {"experiment", cfg.experiment}, {"n", cfg.n},
      {"t", cfg.t},                   {"seed", cfg.seed},
      {"repeats", cfg.repeats},       {"step_size", cfg.step_size},
      {"max_depth", cfg.max_depth},   {"lkernel", cfg.lkernel},
      {"proposal", cfg.proposal},     {"resampling", cfg.resampling},
      {"recycling", cfg.recycling},   {"weighted_fit", cfg.weighted_fit},
      {"threads", cfg.threads},       {"nu", cfg.nu},
      {"mu", cfg.mu},                 {"z", cfg.z},
      {"gamma", cfg.gamma},           {"n_obs", cfg.n_obs},
      {"offset", cfg.offset},         {"init_scale", cfg.init_scale},
      {"rw_scale", cfg.rw_scale},     {"out", cfg.out},
      {"timing", cfg.timing}};
  j["data_seed"] = cfg.data_seed ? nlohmann::json(*cfg.data_seed) : nlohmann::json();
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig &cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;

  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    Problem pb = build_problem(cfg, seed);
    if (result.truth.empty()) result.truth = to_std(pb.truth);

    SmcConfig smc(MassMatrix::identity(pb.target->dim()));
    smc.n_particles = cfg.n;
    smc.n_iterations = cfg.t;
    smc.seed = seed;
    smc.proposal.kind = cfg.proposal == "nuts" ? ProposalKind::kNuts
                                               : ProposalKind::kRandomWalk;
    smc.proposal.nuts.step_size = cfg.step_size;
    smc.proposal.nuts.max_depth = cfg.max_depth;
    smc.proposal.rw_scale = cfg.rw_scale;
    smc.lkernel = cfg.lkernel;
    smc.fit.weighted = cfg.weighted_fit;
    smc.step.resampling = cfg.resampling == "systematic"
                              ? ResamplingScheme::kSystematic
                              : ResamplingScheme::kMultinomial;
    smc.step.threads = cfg.threads;
    smc.recycling = cfg.recycling;

    const GaussianInitial q0 = GaussianInitial::isotropic(pb.init_mean, cfg.init_scale);

    std::vector<ResultRow> rows;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
      return std::chrono::duration<double, std::milli>(
                 std::chrono::steady_clock::now() - start)
          .count();
    };
    TraceSink sink = [&](const IterationTrace &tr) {
      ResultRow row;
      row.experiment = cfg.experiment;
      row.seed = seed;
      row.iteration = tr.iteration;
      row.ess = tr.ess;
      row.resampled = tr.resampled;
      row.estimate = to_std(tr.estimate);
      row.recycled = to_std(tr.recycled);
      const Vector err = tr.recycled - pb.truth;
      row.abs_error = to_std(err.cwiseAbs());
      row.mse = err.squaredNorm() / static_cast<double>(err.size());
      row.wall_ms = cfg.timing ? elapsed_ms() : 0.0;
      rows.push_back(std::move(row));
    };
    const RunEstimates est = run(*pb.target, q0, smc, sink);
    const double runtime = elapsed_ms();

    RunSummary summary;
    summary.seed = seed;
    summary.final_mse = rows.back().mse;
    summary.runtime_ms = runtime;
    summary.n_divergent = est.n_divergent;
    summary.n_gradient_evals = est.n_gradient_evals;
    summary.final_recycled = rows.back().recycled;
    result.runs.push_back(std::move(summary));
    std::move(rows.begin(), rows.end(), std::back_inserter(result.rows));
  }
  return result;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

nlohmann::json ExperimentResult::summary() const {
  std::vector<double> mse, runtime;
  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto &r : runs) {
    mse.push_back(r.final_mse);
    runtime.push_back(r.runtime_ms);
    runs_json.push_back({{"seed", r.seed},
                         {"final_mse", r.final_mse},
                         {"runtime_ms", r.runtime_ms},
                         {"n_divergent", r.n_divergent},
                         {"n_gradient_evals", r.n_gradient_evals},
                         {"final_recycled", r.final_recycled}});
  }
  return {{"config", config_to_json(config)},
          {"truth", truth},
          {"median_final_mse", median(mse)},
          {"iqr_final_mse", {quantile(mse, 0.25), quantile(mse, 0.75)}},
          {"median_runtime_ms", median(runtime)},
          {"runs", runs_json}};
}

void write_csv(std::ostream &os, const std::vector<ResultRow> &rows) {
  const std::size_t dim = rows.empty() ? 0 : rows.front().estimate.size();
  os << "experiment,seed,iteration,ess,resampled";
  for (const char *prefix : {"est_", "rec_", "abserr_"}) {
    for (std::size_t d = 0; d < dim; ++d) os << ',' << prefix << d;
  }
  os << ",mse,wall_ms\n";
  for (const auto &row : rows) {
    os << row.experiment << ',' << row.seed << ',' << row.iteration << ','
       << fmt(row.ess) << ',' << (row.resampled ? 1 : 0);
    for (const auto *v : {&row.estimate, &row.recycled, &row.abs_error}) {
      for (double x : *v) os << ',' << fmt(x);
    }
    os << ',' << fmt(row.mse) << ',' << fmt(row.wall_ms) << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  const auto header = split(line);
  if (header.size() < 7 || (header.size() - 7) % 3 != 0) {
    throw std::runtime_error("csv: unexpected header");
  }
  const std::size_t dim = (header.size() - 7) / 3;
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("csv: row has wrong number of fields");
    }
    ResultRow row;
    row.experiment = std::string(f[0]);
    row.seed = parse_number<std::uint64_t>(f[1]);
    row.iteration = parse_number<std::size_t>(f[2]);
    row.ess = parse_number<double>(f[3]);
    row.resampled = parse_number<int>(f[4]) != 0;
    std::size_t col = 5;
    for (auto *v : {&row.estimate, &row.recycled, &row.abs_error}) {
      for (std::size_t d = 0; d < dim; ++d) v->push_back(parse_number<double>(f[col++]));
    }
    row.mse = parse_number<double>(f[col++]);
    row.wall_ms = parse_number<double>(f[col]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::filesystem::path write_results(const ExperimentResult &result) {
  const std::filesystem::path csv_path(result.config.out);
  if (csv_path.has_parent_path()) {
    std::filesystem::create_directories(csv_path.parent_path());
  }
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  write_csv(csv, result.rows);

  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".summary.json");
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot write " + json_path.string());
  js << result.summary().dump(2) << '\n';
  return json_path;
}

}  // namespace smcnuts::cli
