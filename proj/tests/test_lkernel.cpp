#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "smcnuts/lkernel.hpp"

using smcnuts::JointGaussianFit;
using smcnuts::MassMatrix;
using smcnuts::Matrix;
using smcnuts::Vector;

namespace {

// Random SPD joint covariance over (-p, x) for dimension d.
JointGaussianFit random_fit(std::mt19937_64 &rng, Eigen::Index d) {
  std::normal_distribution<double> normal;
  Matrix a(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  JointGaussianFit fit;
  fit.covariance = a * a.transpose() + 0.5 * Matrix::Identity(2 * d, 2 * d);
  fit.mean = Vector(2 * d);
  for (auto &v : fit.mean) v = 2.0 * normal(rng);
  return fit;
}

struct Pairs {
  std::vector<Vector> neg_p;
  std::vector<Vector> x;
};

Pairs random_pairs(std::mt19937_64 &rng, std::size_t n, Eigen::Index d) {
  std::normal_distribution<double> normal;
  Pairs out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector p(d), x(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      x[k] = 3.0 * normal(rng) + static_cast<double>(k);
      p[k] = 0.4 * x[k] + normal(rng);
    }
    out.neg_p.push_back(p);
    out.x.push_back(x);
  }
  return out;
}

}  // namespace

TEST_SUITE("lkernel") {

TEST_CASE("symmetric kernel") {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  CHECK(smcnuts::symmetric_log_density(Vector::Zero(1), MassMatrix::identity(1)) ==
        doctest::Approx(-0.5 * log2pi));
  Vector p = Vector::Zero(5);
  p[0] = 1.0;
  CHECK(smcnuts::symmetric_log_density(p, MassMatrix::identity(5)) ==
        doctest::Approx(-2.5 * log2pi - 0.5));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 20; ++i) {
    Vector q(3), m(3);
    for (Eigen::Index k = 0; k < 3; ++k) {
      q[k] = normal(rng);
      m[k] = std::exp(normal(rng));
    }
    const MassMatrix mass(m);
    CHECK(smcnuts::symmetric_log_density(q, mass) ==
          smcnuts::momentum_log_density(-q, mass));
    smcnuts::SymmetricLKernel k(mass);
    CHECK(k.log_density(-q, Vector::Zero(3)) == smcnuts::momentum_log_density(-q, mass));
  }
}

TEST_CASE("hand conditioning example") {
  JointGaussianFit fit;
  fit.mean = Vector::Zero(2);
  fit.covariance = Matrix(2, 2);
  fit.covariance << 2.0, 1.0, 1.0, 2.0;
  const smcnuts::GaussianConditional cond(fit);
  CHECK(cond.mean(Vector::Ones(1))[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cond.covariance()(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
  // -p_k = 0.5 sits at the conditional mean
  const double peak = -0.5 * std::log(2.0 * std::numbers::pi * 1.5);
  CHECK(smcnuts::conditional_log_density(fit, Vector::Constant(1, -0.5), Vector::Ones(1)) ==
        doctest::Approx(peak).epsilon(1e-14));
}

TEST_CASE("independence reduces to the momentum marginal") {
  std::mt19937_64 rng(2);
  for (Eigen::Index d = 1; d <= 3; ++d) {
    JointGaussianFit fit = random_fit(rng, d);
    fit.covariance.topRightCorner(d, d).setZero();
    fit.covariance.bottomLeftCorner(d, d).setZero();
    const Vector p = Vector::LinSpaced(d, -1.0, 1.0);
    const Vector x = Vector::LinSpaced(d, 3.0, 2.0);
    CHECK(smcnuts::conditional_log_density(fit, p, x) ==
          doctest::Approx(oracle::mvn_log_density(-p, fit.mean_p(), fit.cov_pp()))
              .epsilon(1e-12));
  }
}

TEST_CASE("joint minus marginal equals conditional") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index d = 1 + i % 3;
    const JointGaussianFit fit = random_fit(rng, d);
    Vector p(d), x(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      p[k] = normal(rng);
      x[k] = fit.mean[d + k] + normal(rng);
    }
    Vector joint_point(2 * d);
    joint_point << -p, x;
    const double joint = oracle::mvn_log_density(joint_point, fit.mean, fit.covariance);
    const double marginal = oracle::mvn_log_density(x, fit.mean_x(), fit.cov_xx());
    CHECK(std::abs(smcnuts::conditional_log_density(fit, p, x) - (joint - marginal)) <
          1e-10);
  }
}

TEST_CASE("conditional integrates to one") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const JointGaussianFit fit = random_fit(rng, 1);
    const smcnuts::GaussianConditional cond(fit);
    const Vector x = Vector::Constant(1, 0.7 * i - 3.0);
    const double centre = cond.mean(x)[0];
    const double sd = std::sqrt(cond.covariance()(0, 0));
    const double mass = oracle::simpson(
        [&](double v) { return std::exp(cond.log_density(Vector::Constant(1, v), x)); },
        centre - 40.0 * sd, centre + 40.0 * sd, 20000);
    CHECK(std::abs(mass - 1.0) < 1e-6);
  }
}

TEST_CASE("two point fit by hand") {
  const std::vector<Vector> neg_p{Vector::Constant(1, 1.0), Vector::Constant(1, 3.0)};
  const std::vector<Vector> x{Vector::Constant(1, 2.0), Vector::Constant(1, 6.0)};
  const auto fit = smcnuts::fit_joint(neg_p, x);
  CHECK(fit.mean[0] == 2.0);
  CHECK(fit.mean[1] == 4.0);
  // 1/N moments: var(-p) = 1, cov = 2, var(x) = 4; jitter 1e-6 * mean(1, 4)
  CHECK(fit.jitter == doctest::Approx(2.5e-6).epsilon(1e-12));
  CHECK(fit.covariance(0, 0) == doctest::Approx(1.0 + 2.5e-6).epsilon(1e-14));
  CHECK(fit.covariance(0, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.covariance(1, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.covariance(1, 1) == doctest::Approx(4.0 + 2.5e-6).epsilon(1e-14));
}

TEST_CASE("identical pairs collapse to jitter") {
  const Vector p = Vector::LinSpaced(3, 0.5, 1.5);
  const Vector x = Vector::LinSpaced(3, -2.0, 2.0);
  const std::vector<Vector> neg_p(6, p), xs(6, x);
  const auto fit = smcnuts::fit_joint(neg_p, xs);
  CHECK(fit.jitter > 0.0);
  CHECK((fit.covariance - fit.jitter * Matrix::Identity(6, 6)).norm() < 1e-20);
  CHECK((fit.mean_p() - p).norm() < 1e-14);
  CHECK((fit.mean_x() - x).norm() < 1e-14);
  CHECK_NOTHROW(smcnuts::GaussianConditional{fit});
}

TEST_CASE("monte carlo fit recovers a known gaussian") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  constexpr int kN = 100000;
  const double mu_p = -0.5, mu_x = 1.5, s_pp = 2.0, s_px = 0.8, s_xx = 1.0;
  const double l11 = std::sqrt(s_pp), l21 = s_px / l11, l22 = std::sqrt(s_xx - l21 * l21);
  std::vector<Vector> neg_p(kN), x(kN);
  for (int i = 0; i < kN; ++i) {
    const double a = normal(rng), b = normal(rng);
    neg_p[i] = Vector::Constant(1, mu_p + l11 * a);
    x[i] = Vector::Constant(1, mu_x + l21 * a + l22 * b);
  }
  const auto fit = smcnuts::fit_joint(neg_p, x);
  CHECK(std::abs(fit.mean[0] - mu_p) < 3.0 * std::sqrt(s_pp / kN));
  CHECK(std::abs(fit.mean[1] - mu_x) < 3.0 * std::sqrt(s_xx / kN));
  CHECK(std::abs(fit.covariance(0, 0) - s_pp) < 3.0 * s_pp * std::sqrt(2.0 / kN));
  CHECK(std::abs(fit.covariance(1, 1) - s_xx) < 3.0 * s_xx * std::sqrt(2.0 / kN));
  CHECK(std::abs(fit.covariance(0, 1) - s_px) <
        3.0 * std::sqrt((s_pp * s_xx + s_px * s_px) / kN));
}

TEST_CASE("translation of positions") {
  std::mt19937_64 rng(6);
  for (Eigen::Index d = 1; d <= 3; ++d) {
    auto pairs = random_pairs(rng, 300, d);
    const auto fit = smcnuts::fit_joint(pairs.neg_p, pairs.x);
    const Vector shift = Vector::LinSpaced(d, 5.0, -3.0);
    for (auto &x : pairs.x) x += shift;
    const auto moved = smcnuts::fit_joint(pairs.neg_p, pairs.x);
    CHECK((moved.mean_x() - fit.mean_x() - shift).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((moved.mean_p() - fit.mean_p()).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((moved.covariance - fit.covariance).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("near-optimal kernel after prepare") {
  std::mt19937_64 rng(7);
  for (Eigen::Index d = 1; d <= 5; ++d) {
    const auto pairs = random_pairs(rng, 200, d);
    smcnuts::NearOptimalLKernel k;
    CHECK_THROWS_AS(k.log_density(pairs.neg_p[0], pairs.x[0]), std::logic_error);
    k.prepare(pairs.neg_p, pairs.x, std::vector<double>(200, 0.0));
    const auto &fit = k.fit();
    CHECK((fit.covariance - fit.covariance.transpose()).norm() == 0.0);
    CHECK((fit.cov_px() - fit.cov_xp().transpose()).norm() == 0.0);
    const smcnuts::GaussianConditional cond(fit);
    CHECK((cond.covariance() - cond.covariance().transpose()).norm() == 0.0);
    CHECK(Eigen::LLT<Matrix>(cond.covariance()).info() == Eigen::Success);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(k.log_density(pairs.neg_p[i], pairs.x[i]) ==
            smcnuts::conditional_log_density(fit, -pairs.neg_p[i], pairs.x[i]));
    }
  }
}

TEST_CASE("weighted fit follows the weights") {
  const std::vector<Vector> neg_p{Vector::Constant(1, 0.0), Vector::Constant(1, 10.0),
                                  Vector::Constant(1, 4.0)};
  const std::vector<Vector> x{Vector::Constant(1, 1.0), Vector::Constant(1, -1.0),
                              Vector::Constant(1, 0.0)};
  const std::vector<double> lw{0.0, std::log(3.0), -std::numeric_limits<double>::infinity()};
  const auto fit = smcnuts::fit_joint(neg_p, x, {.jitter_scale = 1e-6, .weighted = true}, lw);
  CHECK(fit.mean[0] == doctest::Approx(7.5));
  CHECK(fit.mean[1] == doctest::Approx(-0.5));
  const auto plain = smcnuts::fit_joint(neg_p, x);
  CHECK(plain.mean[0] == doctest::Approx(14.0 / 3.0));
}

TEST_CASE("factory and errors") {
  const auto mass = MassMatrix::identity(2);
  CHECK(smcnuts::make_lkernel("symmetric", mass)->name() == "symmetric");
  CHECK(smcnuts::make_lkernel("near-optimal", mass)->name() == "near-optimal");
  CHECK_THROWS_AS(smcnuts::make_lkernel("optimal", mass), std::invalid_argument);
  const std::vector<Vector> one{Vector::Zero(2)};
  CHECK_THROWS_AS(smcnuts::fit_joint(one, one), std::invalid_argument);
}

}  // TEST_SUITE
