#pragma once

#include "trajrepair/bspline.hpp"
#include "trajrepair/costs.hpp"
#include "trajrepair/cspace.hpp"
#include "trajrepair/optimizer.hpp"

#include <string>
#include <vector>

namespace trajrepair {

struct VehicleLimits {
  double v_max = 20.0;     // m/s
  double a_max = 6.0;      // m/s^2
  double j_max = 30.0;     // m/s^3
  double kappa_max = 0.2;  // 1/m

  static VehicleLimits from_vehicle(const VehicleParams& vehicle, double v_max, double a_max,
                                    double j_max) {
    return {v_max, a_max, j_max, vehicle.max_curvature()};
  }
  void validate() const;
};

struct RepairConfig {
  OptimizerConfig optimizer;
  FittingOptions fitting;
  ShapeParams shape;
  int anchor_rounds = 3;
  double collision_check_dt = 0.05;
  HorizonPolicy horizon = HorizonPolicy::kPersist;
  FaceSelection faces = FaceSelection::kRunConsistent;
};

// Everything the planner needs except the repair start time.
struct RepairProblem {
  UniformBSpline reference;
  std::vector<ObstaclePrediction> obstacles;  // inflated
  VehicleParams vehicle;
  VehicleLimits limits;
  CostWeights deformation_weights;
  CostWeights refinement_weights;
  RepairConfig config;

  FeasibilityShape shape() const {
    return FeasibilityShape::from_limits(limits.v_max, limits.a_max, limits.j_max, config.shape);
  }
  void validate() const;
};

enum class RepairStatus { kOk, kUnresolvedCollision, kOptimizerFailure };

std::string to_string(RepairStatus s);

struct RepairCandidate {
  UniformBSpline trajectory;  // reference prefix + repaired suffix
  UniformBSpline deformed;
  UniformBSpline refined;
  std::vector<OptimizeOutcome> deformation_rounds;
  OptimizeOutcome refinement;
  double t_rep = 0.0;
  double junction_time = 0.0;  // first knot at or after t_rep
  int first_free = 0;          // first optimised control point
  double duration_scale = 1.0;
  std::size_t anchor_count = 0;
  RepairStatus status = RepairStatus::kOk;
  std::string message;
};

// Knot span index of the first knot at or after t_rep.
int junction_segment(const UniformBSpline& reference, double t_rep);

/// Two-stage repair starting at t_rep: collision-driven deformation of the
/// suffix, uniform time stretching when limits are exceeded, then refinement
/// towards the deformed curve. Control points whose support reaches before
/// the junction knot stay frozen, so the curve is unchanged before t_rep.
RepairCandidate plan(const RepairProblem& problem, double t_rep);

// Joins the reference prefix with a suffix spline that starts at the junction
// knot for t_rep and repeats the reference's junction control points.
UniformBSpline stitch(const UniformBSpline& reference, const UniformBSpline& suffix, double t_rep,
                      double tolerance = 1e-9);

// Suffix of `spline` starting at knot span k.
UniformBSpline suffix_from_segment(const UniformBSpline& spline, int k);

}  // namespace trajrepair
