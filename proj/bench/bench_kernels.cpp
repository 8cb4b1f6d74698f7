// Parallel kernels against their serial references.

#include "mslmb/fusion.hpp"
#include "mslmb/reference.hpp"
#include "mslmb/scenario.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

struct Instance {
  mslmb::LMBDensity prior;
  std::vector<mslmb::Vector> z;
  mslmb::SensorModel sensor{mslmb::position_sensor(4.0), 0.9, 20.0, 1e6};
};

Instance make_instance(int n, int m) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pos(-500.0, 500.0);
  Instance inst;
  std::vector<mslmb::Track> tracks;
  for (int i = 0; i < n; ++i) {
    mslmb::Vector mu(4);
    mu << pos(rng), pos(rng), 0.0, 0.0;
    tracks.push_back({{0, static_cast<std::uint32_t>(i + 1)}, 0.5, mslmb::Gaussian(mu, mslmb::Matrix::Identity(4, 4) * 25.0)});
  }
  inst.prior = mslmb::LMBDensity(std::move(tracks));
  for (int j = 0; j < m; ++j) {
    mslmb::Vector z(2);
    z << pos(rng), pos(rng);
    inst.z.push_back(z);
  }
  return inst;
}

void BM_LbpSolve(benchmark::State& state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  const auto l = mslmb::build_likelihood_matrix(inst.prior, inst.z, inst.sensor);
  const auto r = inst.prior.existence();
  for (auto _ : state) benchmark::DoNotOptimize(mslmb::lbp_solve(l, r));
}

void BM_LbpSolveSerial(benchmark::State& state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  const auto l = mslmb::build_likelihood_matrix(inst.prior, inst.z, inst.sensor);
  const auto r = inst.prior.existence();
  for (auto _ : state) benchmark::DoNotOptimize(mslmb::reference::lbp_solve(l, r));
}

void BM_SensorUpdates(benchmark::State& state) {
  const auto inst = make_instance(60, 60);
  const std::vector<mslmb::SensorFrame> frames(static_cast<std::size_t>(state.range(0)), {&inst.sensor, inst.z});
  for (auto _ : state) {
    benchmark::DoNotOptimize(mslmb::parallel_sensor_updates(inst.prior, frames, {}, mslmb::CollapseMode::BestComponent,
                                                            static_cast<int>(state.range(0))));
  }
}

void BM_SensorUpdatesSerial(benchmark::State& state) {
  const auto inst = make_instance(60, 60);
  const std::vector<mslmb::SensorFrame> frames(static_cast<std::size_t>(state.range(0)), {&inst.sensor, inst.z});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mslmb::reference::sensor_updates(inst.prior, frames, {}, mslmb::CollapseMode::BestComponent));
  }
}

}  // namespace

BENCHMARK(BM_LbpSolve)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();
BENCHMARK(BM_LbpSolveSerial)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();
BENCHMARK(BM_SensorUpdates)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();
BENCHMARK(BM_SensorUpdatesSerial)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

BENCHMARK_MAIN();
