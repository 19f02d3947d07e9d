#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "oracles.hpp"
#include "smcnuts/dataset.hpp"
#include "smcnuts/target.hpp"

using smcnuts::Matrix;
using smcnuts::Vector;

namespace {

smcnuts::PoissonLassoTarget regression_target(std::uint64_t seed, double z = 0.5) {
  smcnuts::RegressionSetup setup;
  setup.seed = seed;
  setup.prior_shape = z;
  auto data = smcnuts::generate_regression_dataset(setup);
  return smcnuts::PoissonLassoTarget(data.counts, data.basis, 1.0, z);
}

// Gradient check over `points` draws from `draw`.
template <class Draw>
double worst_gradient_error(const smcnuts::TargetModel &model, Draw draw,
                            int points = 100) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const Vector x = draw();
    const Vector fd = oracle::central_difference(
        [&](const Vector &v) { return model.log_density(v); }, x);
    worst = std::max(worst, oracle::max_rel_error(model.grad_log_density(x), fd));
    Vector g;
    const double lp = model.log_density_and_gradient(x, g);
    CHECK(lp == doctest::Approx(model.log_density(x)).epsilon(1e-14));
    worst = std::max(worst, oracle::max_rel_error(g, fd));
  }
  return worst;
}

}  // namespace

TEST_SUITE("target") {

TEST_CASE("gaussian density at the mean") {
  smcnuts::GaussianTarget t(Vector::Zero(1), Vector::Ones(1));
  CHECK(t.log_density(Vector::Zero(1)) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
  smcnuts::GaussianTarget t2(Vector::Constant(2, 1.0), Vector::Constant(2, 4.0));
  // two independent N(1, 4): -log(2 pi) - log 4 - 0.5 * (1/4 + 1/4)
  Vector x(2);
  x << 2.0, 0.0;
  CHECK(t2.log_density(x) ==
        doctest::Approx(-std::log(2.0 * std::numbers::pi) - std::log(4.0) - 0.25));
}

TEST_CASE("student-t density at the centre") {
  smcnuts::StudentTTarget t(5.0, Vector::Zero(1));
  const double expected = std::log(8.0 / (3.0 * std::numbers::pi * std::sqrt(5.0)));
  CHECK(t.log_density(Vector::Zero(1)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(smcnuts::student_t_log_normalizer(5.0) == doctest::Approx(expected));

  smcnuts::StudentTTarget t5(5.0, Vector::LinSpaced(5, 0.0, 8.0));
  CHECK(t5.log_density(t5.mean()) == doctest::Approx(5.0 * expected));
}

TEST_CASE("one-dimensional densities integrate to one") {
  smcnuts::StudentTTarget st(5.0, Vector::Constant(1, 2.0));
  smcnuts::GaussianTarget g(Vector::Constant(1, -1.0), Vector::Constant(1, 2.5));
  for (const smcnuts::TargetModel *m :
       {static_cast<const smcnuts::TargetModel *>(&st),
        static_cast<const smcnuts::TargetModel *>(&g)}) {
    const double mass = oracle::simpson(
        [&](double v) { return std::exp(m->log_density(Vector::Constant(1, v))); },
        -50.0, 50.0, 200000);
    CHECK(std::abs(mass - 1.0) < 1e-6);
  }
}

TEST_CASE("poisson lasso at beta = 0") {
  smcnuts::RegressionSetup setup;
  setup.seed = 3;
  const auto data = smcnuts::generate_regression_dataset(setup);
  smcnuts::PoissonLassoTarget t(data.counts, data.basis, 1.0, 0.5);
  REQUIRE(t.dim() == 12);
  double expected = 0.0;
  for (auto y : data.counts) expected += -1.0 - std::lgamma(static_cast<double>(y) + 1.0);
  // z / (2 gamma Gamma(1/z)) = 0.5 / (2 * 1) per penalized coordinate
  expected += 11.0 * std::log(0.25);
  CHECK(t.log_density(Vector::Zero(12)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("prior penalty grows with a coefficient the likelihood ignores") {
  Matrix basis = Matrix::Zero(4, 2);
  basis.col(0) << 0.1, 0.5, 0.9, 0.3;
  const std::vector<std::uint64_t> counts{1, 3, 0, 2};
  for (double z : {0.5, 1.0, 1.5}) {
    smcnuts::PoissonLassoTarget t(counts, basis, 1.0, z);
    Vector beta(3);
    beta << 0.2, -0.4, 0.0;
    double prev = t.log_density(beta);
    for (double b : {0.1, 0.5, 1.0, 3.0, 10.0}) {
      beta[2] = b;
      const double up = t.log_density(beta);
      beta[2] = -b;
      CHECK(t.log_density(beta) == doctest::Approx(up).epsilon(1e-14));
      CHECK(up < prev);
      prev = up;
    }
  }
}

TEST_CASE("gradients match finite differences") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.5, 3.0);

  Vector var(4);
  var << 0.5, 1.0, 2.0, 3.0;
  smcnuts::GaussianTarget g(Vector::LinSpaced(4, -1.0, 2.0), var);
  CHECK(worst_gradient_error(g, [&] {
          Vector x(4);
          for (auto &v : x) v = 3.0 * normal(rng);
          return x;
        }) < 1e-5);

  smcnuts::StudentTTarget st(5.0, Vector::LinSpaced(5, 0.0, 8.0));
  CHECK(worst_gradient_error(st, [&] {
          Vector x(5);
          for (Eigen::Index i = 0; i < 5; ++i) x[i] = 2.0 * i + 4.0 * normal(rng);
          return x;
        }) < 1e-5);

  for (double z : {0.5, 1.0, 1.5}) {
    const auto pl = regression_target(7, z);
    CHECK(worst_gradient_error(pl, [&] {
            Vector b(12);
            for (auto &v : b) {
              // keep clear of the kink at zero
              v = (normal(rng) < 0 ? -1.0 : 1.0) * unif(rng) * 0.8;
            }
            return b;
          }) < 1e-5);
  }
}

TEST_CASE("subgradient at exact zeros") {
  auto t = regression_target(5, 0.5);
  Vector beta = Vector::Constant(12, 0.3);
  beta[4] = 0.0;
  const auto before = t.subgradient_hits();
  const Vector g = t.grad_log_density(beta);
  CHECK(std::isfinite(g[4]));
  CHECK(t.subgradient_hits() == before + 1);

  auto smooth = regression_target(5, 1.5);
  (void)smooth.grad_log_density(beta);
  CHECK(smooth.subgradient_hits() == 0);
}

TEST_CASE("input validation") {
  smcnuts::StudentTTarget t(5.0, Vector::Zero(3));
  CHECK_THROWS_AS(t.log_density(Vector::Zero(2)), std::invalid_argument);
  Vector bad = Vector::Zero(3);
  bad[1] = std::nan("");
  CHECK_THROWS_AS(t.log_density(bad), std::domain_error);
  bad[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(t.grad_log_density(bad), std::domain_error);
  CHECK_THROWS_AS(smcnuts::StudentTTarget(0.0, Vector::Zero(1)), std::invalid_argument);
  CHECK_THROWS_AS(smcnuts::GaussianTarget(Vector::Zero(2), Vector::Zero(2)),
                  std::invalid_argument);
}

}  // TEST_SUITE
