// Serial reference kernels against their OpenMP versions on a long
// trajectory with many obstacles.

#include "trajrepair/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

namespace {

using namespace trajrepair;

UniformBSpline weave(int segments) {
  std::vector<FrenetPoint> cps;
  for (int i = 0; i < segments + 3; ++i) cps.emplace_back(2.0 * i, std::sin(0.3 * i));
  return UniformBSpline(3, std::move(cps), 0.2);
}

std::vector<ObstaclePrediction> field(int n, double t_end) {
  std::vector<ObstaclePrediction> obs;
  for (int k = 0; k < n; ++k) {
    ObstaclePrediction o;
    o.id = "o" + std::to_string(k);
    // Parked alongside, never touching the trajectory.
    o.frames = {{0.0, FrenetPoint(10.0 * k, 6.0), 2.0, 1.0}, {t_end, FrenetPoint(10.0 * k + 1.0, 6.0), 2.0, 1.0}};
    obs.push_back(std::move(o));
  }
  return obs;
}

template <auto Kernel>
void BM_Collision(benchmark::State& state) {
  const UniformBSpline traj = weave(400);
  const auto obs = field(static_cast<int>(state.range(0)), traj.t_end());
  const auto times = sample_times(traj.t_start(), traj.t_end(), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(traj, times, obs, HorizonPolicy::kPersist));
}

template <auto Kernel>
void BM_Dynamics(benchmark::State& state) {
  const UniformBSpline traj = weave(400);
  const auto times = sample_times(traj.t_start(), traj.t_end(), 0.01 / static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(traj, times, 1.0));
}

BENCHMARK(BM_Collision<kernels::first_collision_serial>)->Arg(4)->Arg(32);
BENCHMARK(BM_Collision<kernels::first_collision_omp>)->Arg(4)->Arg(32);
BENCHMARK(BM_Dynamics<kernels::dynamics_extremes_serial>)->Arg(1)->Arg(8);
BENCHMARK(BM_Dynamics<kernels::dynamics_extremes_omp>)->Arg(1)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
