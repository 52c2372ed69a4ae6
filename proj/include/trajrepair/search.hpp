#pragma once

#include "trajrepair/bspline.hpp"
#include "trajrepair/cspace.hpp"
#include "trajrepair/repair.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace trajrepair {

struct SearchConfig {
  double delta_t = 0.4;             // bisection resolution, s
  double time_budget = 10.0;        // wall clock for the whole search, s
  double collision_check_dt = 0.05;  // s
  double speed_floor = 1.0;         // curvature is only checked above this speed, m/s

  void validate() const;
};

struct FeasibilityReport {
  bool collision_free = true;
  double first_collision_time = kInfinity;  // absolute time
  std::string colliding_obstacle;
  bool speed_ok = true;
  bool acceleration_ok = true;
  bool jerk_ok = true;
  bool curvature_ok = true;
  double speed_ratio = 0.0;  // worst |v| / v_max
  double acceleration_ratio = 0.0;
  double jerk_ratio = 0.0;
  double max_curvature = 0.0;
  double max_lateral_acceleration = 0.0;
  double max_longitudinal_acceleration = 0.0;
  double min_speed = 0.0;
  bool overall = true;
};

// Hard check on sampled states: collisions against inflated occupancy and
// Euclidean-norm speed/acceleration/jerk plus path curvature limits.
FeasibilityReport is_feasible(const UniformBSpline& traj,
                              std::span<const ObstaclePrediction> obstacles,
                              const VehicleLimits& limits, double dt,
                              HorizonPolicy policy = HorizonPolicy::kPersist,
                              double speed_floor = 1.0);

enum class SearchTermination { kResolution, kTimeBudget, kDegenerate };

std::string to_string(SearchTermination t);

// Result of one planner call inside the bisection.
struct ProbeOutcome {
  bool feasible = false;
  std::optional<UniformBSpline> trajectory;
  std::optional<RepairCandidate> candidate;
  std::optional<FeasibilityReport> report;
};

struct ProbeRecord {
  double t_rep = 0.0;
  bool feasible = false;
  double bracket_start = 0.0;  // after the update
  double bracket_end = 0.0;
  double elapsed_s = 0.0;      // planner + feasibility check
  ProbeOutcome outcome;
};

struct BisectionResult {
  double f_ttr = 0.0;            // final t_rep
  double last_feasible = 0.0;    // final bracket start
  double bracket_end = 0.0;
  int gamma_probe = -1;          // index of the probe that produced gamma, -1: reference
  SearchTermination termination = SearchTermination::kResolution;
  std::vector<ProbeRecord> probes;
};

using Probe = std::function<ProbeOutcome(double t_rep)>;
using TimeLimit = std::function<bool()>;

/// Bisection over the repair start time on [0, ttc] for 0 < ttc < inf.
/// The first probe is t_rep = 0; each later probe is the bracket midpoint.
/// Stops once the bracket is no wider than delta_t or `in_time` fails; on a
/// budget stop the result is the last feasible bracket edge.
BisectionResult bisect_repair_time(double ttc, double delta_t, const Probe& probe,
                                   const TimeLimit& in_time);

struct FttrResult {
  explicit FttrResult(UniformBSpline reference) : gamma(std::move(reference)) {}

  double f_ttr = kInfinity;
  double ttc = kInfinity;
  std::string ttc_obstacle;
  double last_feasible = 0.0;  // t_start at exit
  UniformBSpline gamma;
  bool gamma_is_reference = true;
  bool unresolved = false;  // no feasible repair found in a collision case
  SearchTermination termination = SearchTermination::kDegenerate;
  std::vector<ProbeRecord> iterations;
  double total_time_s = 0.0;
};

// Full search on a problem: collision detection on the reference, then
// bisection with the two-stage planner and the hard feasibility check.
FttrResult search(const RepairProblem& problem, const SearchConfig& config);

}  // namespace trajrepair
