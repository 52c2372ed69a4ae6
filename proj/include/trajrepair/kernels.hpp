#pragma once

// Sampled trajectory checks. Each kernel has a serial reference version and
// an OpenMP version; both return identical results for identical inputs.

#include "trajrepair/bspline.hpp"
#include "trajrepair/cspace.hpp"

#include <span>

namespace trajrepair::kernels {

// Below this many samples the OpenMP versions run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 256;

struct SampledCollision {
  long sample_index = -1;  // earliest colliding sample, -1 when clear
  int obstacle_index = -1;  // lowest obstacle index colliding at that sample
};

SampledCollision first_collision_serial(const UniformBSpline& traj, std::span<const double> times,
                                        std::span<const ObstaclePrediction> obstacles,
                                        HorizonPolicy policy);
SampledCollision first_collision_omp(const UniformBSpline& traj, std::span<const double> times,
                                     std::span<const ObstaclePrediction> obstacles,
                                     HorizonPolicy policy);

struct Extreme {
  double value = 0.0;
  double t = 0.0;
};

// Euclidean-norm maxima of velocity, acceleration, jerk and the largest path
// curvature |x' x x''| / |x'|^3 over samples whose speed exceeds speed_floor.
// Ties resolve to the earliest sample.
struct DynamicsExtremes {
  Extreme speed;
  Extreme min_speed{kInfinity, 0.0};
  Extreme acceleration;
  Extreme jerk;
  Extreme curvature;
  Extreme lateral_acceleration;       // |a_l|
  Extreme longitudinal_acceleration;  // |a_s|
};

DynamicsExtremes dynamics_extremes_serial(const UniformBSpline& traj,
                                          std::span<const double> times, double speed_floor);
DynamicsExtremes dynamics_extremes_omp(const UniformBSpline& traj, std::span<const double> times,
                                       double speed_floor);

}  // namespace trajrepair::kernels
