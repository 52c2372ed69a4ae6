#include "trajrepair/search.hpp"

#include "trajrepair/errors.hpp"
#include "trajrepair/kernels.hpp"

#include <chrono>
#include <cmath>

namespace trajrepair {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void SearchConfig::validate() const {
  if (!(delta_t > 0.0)) throw ContractViolation("search delta_t must be > 0");
  if (!(time_budget > 0.0)) throw ContractViolation("search time budget must be > 0");
  if (!(collision_check_dt > 0.0)) throw ContractViolation("collision check step must be > 0");
  if (!(speed_floor >= 0.0)) throw ContractViolation("speed floor must be >= 0");
}

std::string to_string(SearchTermination t) {
  switch (t) {
    case SearchTermination::kResolution: return "resolution";
    case SearchTermination::kTimeBudget: return "time-budget";
    case SearchTermination::kDegenerate: return "degenerate-branch";
  }
  return "unknown";
}

FeasibilityReport is_feasible(const UniformBSpline& traj,
                              std::span<const ObstaclePrediction> obstacles,
                              const VehicleLimits& limits, double dt, HorizonPolicy policy,
                              double speed_floor) {
  FeasibilityReport r;
  const CollisionResult hit = detect_collision(traj, obstacles, dt, policy);
  if (hit.collides()) {
    r.collision_free = false;
    r.first_collision_time = traj.t_start() + hit.ttc;
    r.colliding_obstacle = hit.obstacle_id;
  }

  const std::vector<double> times = sample_times(traj.t_start(), traj.t_end(), dt);
  const auto ext = kernels::dynamics_extremes_omp(traj, times, speed_floor);
  r.speed_ratio = ext.speed.value / limits.v_max;
  r.acceleration_ratio = ext.acceleration.value / limits.a_max;
  r.jerk_ratio = ext.jerk.value / limits.j_max;
  r.max_curvature = ext.curvature.value;
  r.max_lateral_acceleration = ext.lateral_acceleration.value;
  r.max_longitudinal_acceleration = ext.longitudinal_acceleration.value;
  r.min_speed = ext.min_speed.value;
  r.speed_ok = r.speed_ratio <= 1.0;
  r.acceleration_ok = r.acceleration_ratio <= 1.0;
  r.jerk_ok = r.jerk_ratio <= 1.0;
  r.curvature_ok = r.max_curvature <= limits.kappa_max;
  r.overall = r.collision_free && r.speed_ok && r.acceleration_ok && r.jerk_ok && r.curvature_ok;
  return r;
}

BisectionResult bisect_repair_time(double ttc, double delta_t, const Probe& probe,
                                   const TimeLimit& in_time) {
  if (!(ttc > 0.0) || !std::isfinite(ttc))
    throw ContractViolation("bisection needs a finite positive time-to-collision");
  if (!(delta_t > 0.0)) throw ContractViolation("bisection resolution must be > 0");

  BisectionResult out;
  double t_start = 0.0;
  double t_rep = 0.0;
  double t_end = ttc;
  while (std::abs(t_end - t_start) > delta_t && in_time()) {
    const auto t0 = Clock::now();
    ProbeRecord rec;
    rec.t_rep = t_rep;
    rec.outcome = probe(t_rep);
    rec.elapsed_s = seconds_since(t0);
    rec.feasible = rec.outcome.feasible;
    if (rec.feasible) {
      t_start = t_rep;
      out.gamma_probe = static_cast<int>(out.probes.size());
    } else {
      t_end = t_rep;
    }
    rec.bracket_start = t_start;
    rec.bracket_end = t_end;
    out.probes.push_back(std::move(rec));
    t_rep = 0.5 * (t_start + t_end);
  }
  out.last_feasible = t_start;
  out.bracket_end = t_end;
  if (std::abs(t_end - t_start) > delta_t) {
    out.termination = SearchTermination::kTimeBudget;
    out.f_ttr = t_start;
  } else {
    out.termination = SearchTermination::kResolution;
    out.f_ttr = t_rep;
  }
  return out;
}

FttrResult search(const RepairProblem& problem, const SearchConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  const auto& policy = problem.config.horizon;

  FttrResult result(problem.reference);
  const CollisionResult hit =
      detect_collision(problem.reference, problem.obstacles, config.collision_check_dt, policy);
  result.ttc = hit.ttc;
  result.ttc_obstacle = hit.obstacle_id;

  if (!hit.collides()) {
    result.f_ttr = kInfinity;
  } else if (hit.ttc == 0.0) {
    result.f_ttr = 0.0;
    result.unresolved = true;
  } else {
    const Probe probe = [&](double t_rep) {
      ProbeOutcome out;
      RepairCandidate cand = plan(problem, problem.reference.t_start() + t_rep);
      FeasibilityReport report = is_feasible(cand.trajectory, problem.obstacles, problem.limits,
                                             config.collision_check_dt, policy, config.speed_floor);
      out.feasible = report.overall && cand.status != RepairStatus::kOptimizerFailure;
      out.trajectory = cand.trajectory;
      out.candidate = std::move(cand);
      out.report = report;
      return out;
    };
    const TimeLimit in_time = [&] { return seconds_since(t0) < config.time_budget; };

    BisectionResult b = bisect_repair_time(hit.ttc, config.delta_t, probe, in_time);
    result.f_ttr = b.f_ttr;
    result.last_feasible = b.last_feasible;
    result.termination = b.termination;
    if (b.gamma_probe >= 0) {
      result.gamma = *b.probes[b.gamma_probe].outcome.trajectory;
      result.gamma_is_reference = false;
    } else {
      result.unresolved = true;
    }
    result.iterations = std::move(b.probes);
  }
  result.total_time_s = seconds_since(t0);
  return result;
}

}  // namespace trajrepair
