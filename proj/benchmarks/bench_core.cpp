#include <benchmark/benchmark.h>

#include <cyllevy/characteristics.hpp>
#include <cyllevy/driver.hpp>
#include <cyllevy/integrate.hpp>
#include <cyllevy/limits.hpp>
#include <cyllevy/modular.hpp>

using namespace cyllevy;

namespace {

constexpr int kDim = 8;

HSMap random_map(Stream& rng, int d) {
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return HSMap(m / m.norm());
}

Driver stable_driver(double alpha) {
  return Driver(CylCharacteristics(HVec::zero(kDim, Space::kG), Matrix::Zero(kDim, kDim), CanonicalStableLevy{alpha}));
}

Driver poisson_driver(Stream& rng) {
  std::vector<Vector> atoms;
  for (double r : {0.6, 1.5, 2.5}) atoms.push_back(r * random_unit_vector(rng, kDim));
  return Driver(CylCharacteristics::compound_poisson(atoms, {1.0, 0.7, 0.4}, Vector::Zero(kDim)));
}

StepFunction random_step(Stream& rng, int intervals) {
  std::vector<HSMap> values;
  for (int i = 0; i <= intervals; ++i) values.push_back(random_map(rng, kDim));
  return StepFunction(Partition::uniform(0.0, 1.0, intervals), std::move(values));
}

void BM_StableIncrement(benchmark::State& state) {
  const Driver driver = stable_driver(1.5);
  Stream rng(1, StreamModule::kTest, 0);
  const HSMap phi = random_map(rng, kDim);
  for (auto _ : state) benchmark::DoNotOptimize(sample_increment(driver, phi, 0.1, rng));
}
BENCHMARK(BM_StableIncrement);

void BM_PoissonPath(benchmark::State& state) {
  Stream rng(2, StreamModule::kTest, 0);
  const Driver driver = poisson_driver(rng);
  const Partition p = Partition::dyadic(0.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sample_g_path(driver, p, rng));
}
BENCHMARK(BM_PoissonPath)->Arg(4)->Arg(10);

void BM_Triplet(benchmark::State& state) {
  Stream rng(3, StreamModule::kTest, 0);
  const Driver driver = state.range(0) == 0 ? poisson_driver(rng) : stable_driver(1.2);
  const HSMap phi = random_map(rng, kDim);
  for (auto _ : state) benchmark::DoNotOptimize(driver.triplet(phi));
}
BENCHMARK(BM_Triplet)->Arg(0)->Arg(1);

void BM_Modular(benchmark::State& state) {
  Stream rng(4, StreamModule::kTest, 0);
  const Driver driver = poisson_driver(rng);
  const StepFunction psi = random_step(rng, static_cast<int>(state.range(0)));
  const Stream l_rng(4, StreamModule::kTest, 1);
  for (auto _ : state) benchmark::DoNotOptimize(modular_of(driver, psi, 64, l_rng));
}
BENCHMARK(BM_Modular)->Arg(1)->Arg(16);

void BM_IntegrateStep(benchmark::State& state) {
  Stream rng(5, StreamModule::kTest, 0);
  const Driver driver = stable_driver(1.5);
  const StepFunction psi = random_step(rng, 16);
  const Stream draws(5, StreamModule::kTest, 1);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_step_det(psi, driver, 10000, draws));
}
BENCHMARK(BM_IntegrateStep)->Unit(benchmark::kMillisecond);

void BM_SupGamma(benchmark::State& state) {
  Stream rng(6, StreamModule::kTest, 0);
  const Driver driver = poisson_driver(rng);
  const StepFunction psi = random_step(rng, 8);
  const Stream search(6, StreamModule::kTest, 1);
  const GammaSearchOptions options{16, 2000, 64, std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(sup_gamma_ky_fan(psi, driver, options, search));
}
BENCHMARK(BM_SupGamma)->Unit(benchmark::kMillisecond);

void BM_PartitionLimits(benchmark::State& state) {
  Stream rng(7, StreamModule::kTest, 0);
  const Driver driver = poisson_driver(rng);
  const std::vector<HSMap> phis{random_map(rng, kDim)};
  const Stream mc(7, StreamModule::kTest, 1);
  for (auto _ : state) benchmark::DoNotOptimize(partition_limits(driver, phis, 0.0, 1.0, {2, 6, 10}, 1000, mc));
}
BENCHMARK(BM_PartitionLimits)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
