#include "trajrepair/kernels.hpp"

#include <omp.h>

#include <climits>
#include <cmath>

namespace trajrepair::kernels {

namespace {

// Lowest obstacle index occupying q at time t, or -1.
int colliding_obstacle(const FrenetPoint& q, double t,
                       std::span<const ObstaclePrediction> obstacles, HorizonPolicy policy) {
  for (int j = 0; j < static_cast<int>(obstacles.size()); ++j) {
    const auto rect = occupancy_at(obstacles[j], t, policy);
    if (rect && rect->contains(q)) return j;
  }
  return -1;
}

void keep_max(Extreme& e, double value, double t) {
  if (value > e.value || (value == e.value && t < e.t)) e = Extreme{value, t};
}

void keep_min(Extreme& e, double value, double t) {
  if (value < e.value || (value == e.value && t < e.t)) e = Extreme{value, t};
}

void merge(DynamicsExtremes& into, const DynamicsExtremes& from) {
  keep_max(into.speed, from.speed.value, from.speed.t);
  keep_min(into.min_speed, from.min_speed.value, from.min_speed.t);
  keep_max(into.acceleration, from.acceleration.value, from.acceleration.t);
  keep_max(into.jerk, from.jerk.value, from.jerk.t);
  keep_max(into.curvature, from.curvature.value, from.curvature.t);
  keep_max(into.lateral_acceleration, from.lateral_acceleration.value, from.lateral_acceleration.t);
  keep_max(into.longitudinal_acceleration, from.longitudinal_acceleration.value,
           from.longitudinal_acceleration.t);
}

struct DerivativeSet {
  UniformBSpline vel, acc, jerk;
  int degree;

  explicit DerivativeSet(const UniformBSpline& s)
      : vel(s.degree() >= 1 ? s.derivative(1) : s),
        acc(s.degree() >= 2 ? s.derivative(2) : s),
        jerk(s.degree() >= 3 ? s.derivative(3) : s),
        degree(s.degree()) {}

  void accumulate(DynamicsExtremes& e, double t, double speed_floor) const {
    const Vec2 v = degree >= 1 ? vel.evaluate(t) : Vec2::Zero();
    const Vec2 a = degree >= 2 ? acc.evaluate(t) : Vec2::Zero();
    const Vec2 j = degree >= 3 ? jerk.evaluate(t) : Vec2::Zero();
    const double speed = v.norm();
    keep_max(e.speed, speed, t);
    keep_min(e.min_speed, speed, t);
    keep_max(e.acceleration, a.norm(), t);
    keep_max(e.jerk, j.norm(), t);
    keep_max(e.longitudinal_acceleration, std::abs(a.x()), t);
    keep_max(e.lateral_acceleration, std::abs(a.y()), t);
    if (speed > speed_floor) {
      const double cross = v.x() * a.y() - v.y() * a.x();
      keep_max(e.curvature, std::abs(cross) / (speed * speed * speed), t);
    }
  }
};

DynamicsExtremes initial_extremes(std::span<const double> times) {
  const double t0 = times.empty() ? 0.0 : times.front();
  DynamicsExtremes e;
  e.speed.t = e.acceleration.t = e.jerk.t = e.curvature.t = t0;
  e.lateral_acceleration.t = e.longitudinal_acceleration.t = t0;
  return e;
}

}  // namespace

SampledCollision first_collision_serial(const UniformBSpline& traj, std::span<const double> times,
                                        std::span<const ObstaclePrediction> obstacles,
                                        HorizonPolicy policy) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    const int j = colliding_obstacle(traj.evaluate(times[k]), times[k], obstacles, policy);
    if (j >= 0) return SampledCollision{static_cast<long>(k), j};
  }
  return {};
}

SampledCollision first_collision_omp(const UniformBSpline& traj, std::span<const double> times,
                                     std::span<const ObstaclePrediction> obstacles,
                                     HorizonPolicy policy) {
  const long n = static_cast<long>(times.size());
  const long n_obs = static_cast<long>(obstacles.size());
  if (n_obs == 0) return {};
  // Encoded as sample * n_obs + obstacle so a min-reduction yields the
  // earliest sample and the lowest obstacle index on it.
  long best = LONG_MAX;
#pragma omp parallel for reduction(min : best) schedule(static) \
    if (static_cast<std::size_t>(n) >= kParallelThreshold)
  for (long k = 0; k < n; ++k) {
    const int j = colliding_obstacle(traj.evaluate(times[k]), times[k], obstacles, policy);
    if (j >= 0) best = std::min(best, k * n_obs + j);
  }
  if (best == LONG_MAX) return {};
  return SampledCollision{best / n_obs, static_cast<int>(best % n_obs)};
}

DynamicsExtremes dynamics_extremes_serial(const UniformBSpline& traj,
                                          std::span<const double> times, double speed_floor) {
  const DerivativeSet d(traj);
  DynamicsExtremes e = initial_extremes(times);
  for (double t : times) d.accumulate(e, t, speed_floor);
  return e;
}

DynamicsExtremes dynamics_extremes_omp(const UniformBSpline& traj, std::span<const double> times,
                                       double speed_floor) {
  const DerivativeSet d(traj);
  DynamicsExtremes result = initial_extremes(times);
  const long n = static_cast<long>(times.size());
#pragma omp parallel if (static_cast<std::size_t>(n) >= kParallelThreshold)
  {
    DynamicsExtremes local = initial_extremes(times);
#pragma omp for schedule(static) nowait
    for (long k = 0; k < n; ++k) d.accumulate(local, times[k], speed_floor);
#pragma omp critical
    merge(result, local);
  }
  return result;
}

}  // namespace trajrepair::kernels
