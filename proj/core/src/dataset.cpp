#include "smcnuts/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace smcnuts {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> to_std(const Vector &v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector to_eigen(const std::vector<double> &v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Vector default_true_coefficients() {
  Vector beta = Vector::Zero(12);
  beta[0] = 1.0;
  beta[2] = 1.5;
  beta[4] = -2.0;
  beta[6] = 1.0;
  beta[7] = -2.0;
  beta[9] = 1.2;
  return beta;
}

Matrix gaussian_basis(const std::vector<double> &inputs, const Vector &centres,
                      const Vector &widths) {
  if (centres.size() != widths.size()) {
    throw std::invalid_argument("gaussian_basis: centres/widths size mismatch");
  }
  if ((widths.array() <= 0.0).any()) {
    throw std::invalid_argument("gaussian_basis: widths must be positive");
  }
  Matrix phi(static_cast<Eigen::Index>(inputs.size()), centres.size());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      const double d = inputs[static_cast<std::size_t>(i)] - centres[j];
      phi(i, j) = std::exp(-d * d / (2.0 * widths[j] * widths[j]));
    }
  }
  return phi;
}

Vector equispaced_centres(double lo, double hi, std::size_t count) {
  if (count == 0) throw std::invalid_argument("equispaced_centres: count == 0");
  if (count == 1) return Vector::Constant(1, 0.5 * (lo + hi));
  return Vector::LinSpaced(static_cast<Eigen::Index>(count), lo, hi);
}

RegressionDataset generate_regression_dataset(const RegressionSetup &setup) {
  if (!(setup.width > 0.0)) {
    throw std::invalid_argument("generate_regression_dataset: width must be > 0");
  }
  if (setup.n_obs == 0 || setup.n_basis == 0) {
    throw std::invalid_argument("generate_regression_dataset: empty design");
  }
  if (static_cast<std::size_t>(setup.beta_true.size()) != setup.n_basis + 1) {
    throw std::invalid_argument(
        "generate_regression_dataset: beta_true must have n_basis + 1 entries");
  }

  RegressionDataset data;
  data.seed = setup.seed;
  data.beta_true = setup.beta_true;
  data.prior_scale = setup.prior_scale;
  data.prior_shape = setup.prior_shape;

  Rng rng = make_stream(setup.seed, 0x64617461ULL);
  std::uniform_real_distribution<double> input_dist(0.0, 1.0);
  data.inputs.resize(setup.n_obs);
  for (auto &x : data.inputs) x = input_dist(rng);

  const auto [lo, hi] =
      std::minmax_element(data.inputs.begin(), data.inputs.end());
  data.centres = equispaced_centres(*lo, *hi, setup.n_basis);
  data.widths =
      Vector::Constant(static_cast<Eigen::Index>(setup.n_basis), setup.width);
  data.basis = gaussian_basis(data.inputs, data.centres, data.widths);

  const Vector eta =
      (data.basis * setup.beta_true.tail(data.basis.cols())).array() +
      setup.beta_true[0];
  data.counts.resize(setup.n_obs);
  for (std::size_t i = 0; i < setup.n_obs; ++i) {
    std::poisson_distribution<std::uint64_t> pois(
        std::exp(eta[static_cast<Eigen::Index>(i)]));
    data.counts[i] = pois(rng);
  }
  return data;
}

void write_dataset(const RegressionDataset &data,
                   const std::filesystem::path &csv_path,
                   const std::filesystem::path &json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  csv << "x,y\n";
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    csv << format_double(data.inputs[i]) << ',' << data.counts[i] << '\n';
  }

  nlohmann::json meta;
  meta["centres"] = to_std(data.centres);
  meta["widths"] = to_std(data.widths);
  meta["z"] = data.prior_shape;
  meta["gamma"] = data.prior_scale;
  meta["beta_true"] = to_std(data.beta_true);
  meta["seed"] = data.seed;
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot write " + json_path.string());
  js << meta.dump(2) << '\n';
}

RegressionDataset read_dataset(const std::filesystem::path &csv_path,
                               const std::filesystem::path &json_path) {
  std::ifstream js(json_path);
  if (!js) throw std::runtime_error("cannot read " + json_path.string());
  const nlohmann::json meta = nlohmann::json::parse(js);

  RegressionDataset data;
  data.centres = to_eigen(meta.at("centres").get<std::vector<double>>());
  data.widths = to_eigen(meta.at("widths").get<std::vector<double>>());
  data.prior_shape = meta.at("z").get<double>();
  data.prior_scale = meta.at("gamma").get<double>();
  data.beta_true = to_eigen(meta.at("beta_true").get<std::vector<double>>());
  data.seed = meta.at("seed").get<std::uint64_t>();

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot read " + csv_path.string());
  std::string line;
  if (!std::getline(csv, line) || line != "x,y") {
    throw std::runtime_error(csv_path.string() + ": expected header 'x,y'");
  }
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(csv_path.string() + ": malformed row '" + line +
                               "'");
    }
    double x = 0.0;
    std::uint64_t y = 0;
    const char *begin = line.data();
    const auto rx = std::from_chars(begin, begin + comma, x);
    const auto ry =
        std::from_chars(begin + comma + 1, begin + line.size(), y);
    if (rx.ec != std::errc() || ry.ec != std::errc()) {
      throw std::runtime_error(csv_path.string() + ": malformed row '" + line +
                               "'");
    }
    data.inputs.push_back(x);
    data.counts.push_back(y);
  }
  data.basis = gaussian_basis(data.inputs, data.centres, data.widths);
  return data;
}

}  // namespace smcnuts
