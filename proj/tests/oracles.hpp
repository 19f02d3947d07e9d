// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library's numerical paths.
#ifndef SMCNUTS_TESTS_ORACLES_HPP
#define SMCNUTS_TESTS_ORACLES_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "smcnuts/target.hpp"

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Vector central_difference(const std::function<double(const Vector &)> &f,
                                 const Vector &x, double step = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += step;
    b[i] -= step;
    g[i] = (f(a) - f(b)) / (2.0 * step);
  }
  return g;
}

// Componentwise |a - b| / max(1, |b|).
inline double max_rel_error(const Vector &a, const Vector &b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

// Composite Simpson rule on [lo, hi] with an even number of intervals.
inline double simpson(const std::function<double(double)> &f, double lo, double hi,
                      int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (hi - lo) / intervals;
  double s = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

// Textbook multivariate normal log-density through an explicit inverse and
// determinant.
inline double mvn_log_density(const Vector &v, const Vector &mean, const Matrix &cov) {
  const Vector r = v - mean;
  const double quad = r.dot(cov.inverse() * r);
  return -0.5 * static_cast<double>(v.size()) * std::log(2.0 * std::numbers::pi) -
         0.5 * std::log(cov.determinant()) - 0.5 * quad;
}

// Sample mean and batch-means standard error of a chain.
struct ChainStats {
  double mean;
  double mean_se;
  double variance;
  double variance_se;
};

inline ChainStats batch_means(const std::vector<double> &xs, int batches = 50) {
  const std::size_t per = xs.size() / static_cast<std::size_t>(batches);
  auto stats = [&](auto g) {
    std::vector<double> bm(static_cast<std::size_t>(batches), 0.0);
    double total = 0.0;
    for (int b = 0; b < batches; ++b) {
      for (std::size_t i = 0; i < per; ++i) bm[static_cast<std::size_t>(b)] += g(xs[b * per + i]);
      bm[static_cast<std::size_t>(b)] /= static_cast<double>(per);
      total += bm[static_cast<std::size_t>(b)];
    }
    const double m = total / batches;
    double ss = 0.0;
    for (double v : bm) ss += (v - m) * (v - m);
    return std::pair{m, std::sqrt(ss / (batches - 1) / batches)};
  };
  const auto [m, mse] = stats([](double x) { return x; });
  const auto [m2, m2se] = stats([](double x) { return x * x; });
  return {m, mse, m2 - m * m, m2se};
}

}  // namespace oracle

namespace testing_targets {

// Constant density; the gradient is identically zero.
class FlatTarget final : public smcnuts::TargetModel {
 public:
  explicit FlatTarget(Eigen::Index d, double level = 0.0) : d_(d), level_(level) {}
  Eigen::Index dim() const override { return d_; }
  double log_density(const smcnuts::Vector &x) const override {
    check_input(x);
    return level_;
  }
  smcnuts::Vector grad_log_density(const smcnuts::Vector &x) const override {
    check_input(x);
    return smcnuts::Vector::Zero(d_);
  }

 private:
  Eigen::Index d_;
  double level_;
};

// Forwards to another target and counts gradient evaluations.
class CountingTarget final : public smcnuts::TargetModel {
 public:
  explicit CountingTarget(const smcnuts::TargetModel &inner) : inner_(inner) {}
  Eigen::Index dim() const override { return inner_.dim(); }
  double log_density(const smcnuts::Vector &x) const override {
    return inner_.log_density(x);
  }
  smcnuts::Vector grad_log_density(const smcnuts::Vector &x) const override {
    ++grads_;
    return inner_.grad_log_density(x);
  }
  double log_density_and_gradient(const smcnuts::Vector &x,
                                  smcnuts::Vector &g) const override {
    ++grads_;
    return inner_.log_density_and_gradient(x, g);
  }
  std::uint64_t gradients() const { return grads_.load(); }
  void reset() { grads_ = 0; }

 private:
  const smcnuts::TargetModel &inner_;
  mutable std::atomic<std::uint64_t> grads_{0};
};

}  // namespace testing_targets

#endif  // SMCNUTS_TESTS_ORACLES_HPP
