#include <benchmark/benchmark.h>

#include "smcnuts/dataset.hpp"
#include "smcnuts/hamiltonian.hpp"
#include "smcnuts/lkernel.hpp"
#include "smcnuts/nuts.hpp"
#include "smcnuts/smc.hpp"
#include "smcnuts/target.hpp"

namespace {

using smcnuts::MassMatrix;
using smcnuts::Vector;

smcnuts::StudentTTarget student(Eigen::Index d) {
  return smcnuts::StudentTTarget(5.0, Vector::LinSpaced(d, 0.0, 2.0 * (d - 1)));
}

void BM_Leapfrog(benchmark::State &state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const auto model = student(d);
  const auto mass = MassMatrix::identity(d);
  auto s = smcnuts::make_integrator_state(model, {Vector::Ones(d), Vector::Ones(d)});
  for (auto _ : state) {
    auto out = smcnuts::leapfrog(model, s, 0.01, mass);
    benchmark::DoNotOptimize(out.state.point.x.data());
  }
}
BENCHMARK(BM_Leapfrog)->Arg(5)->Arg(50);

void BM_NutsPropose(benchmark::State &state) {
  const auto model = student(5);
  const smcnuts::NutsConfig cfg(MassMatrix::identity(5), 0.1,
                                static_cast<int>(state.range(0)));
  auto rng = smcnuts::make_stream(1, 0);
  Vector x = Vector::LinSpaced(5, 0.0, 8.0);
  for (auto _ : state) {
    const Vector p = smcnuts::sample_momentum(cfg.mass, rng);
    auto out = smcnuts::nuts_propose(model, x, p, cfg, rng);
    x = out.position;
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_NutsPropose)->Arg(5)->Arg(10);

void BM_SmcStep(benchmark::State &state) {
  const auto model = student(5);
  const auto mass = MassMatrix::identity(5);
  const smcnuts::ProposalConfig proposal{smcnuts::NutsConfig(mass)};
  auto kernel = smcnuts::make_lkernel(state.range(1) ? "near-optimal" : "symmetric", mass);
  const auto start = smcnuts::initialize(
      model, smcnuts::GaussianInitial::isotropic(Vector::Constant(5, 5.0)),
      static_cast<std::size_t>(state.range(0)), 1);
  auto ensemble = start;
  for (auto _ : state) {
    benchmark::DoNotOptimize(smcnuts::smc_step(ensemble, model, proposal, *kernel).ess);
  }
}
BENCHMARK(BM_SmcStep)
    ->Args({50, 0})
    ->Args({50, 1})
    ->Args({200, 0})
    ->Args({200, 1})
    ->Unit(benchmark::kMillisecond);

void BM_PoissonLassoGradient(benchmark::State &state) {
  const auto data = smcnuts::generate_regression_dataset({});
  smcnuts::PoissonLassoTarget model(data.counts, data.basis, 1.0, 0.5);
  const Vector beta = 0.1 * Vector::Ones(12);
  for (auto _ : state) {
    auto g = model.grad_log_density(beta);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_PoissonLassoGradient);

}  // namespace

BENCHMARK_MAIN();
