#include "trajrepair/repair.hpp"

#include "trajrepair/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

namespace trajrepair {

void VehicleLimits::validate() const {
  if (!(v_max > 0.0) || !(a_max > 0.0) || !(j_max > 0.0) || !(kappa_max > 0.0))
    throw ContractViolation("vehicle limits must all be > 0");
}

void RepairProblem::validate() const {
  if (reference.degree() < 3)
    throw ContractViolation("reference spline must be at least cubic for jerk penalties");
  vehicle.validate();
  limits.validate();
  deformation_weights.validate();
  refinement_weights.validate();
  config.optimizer.validate();
  if (config.anchor_rounds < 1) throw ContractViolation("anchor_rounds must be >= 1");
  if (!(config.collision_check_dt > 0.0))
    throw ContractViolation("collision check step must be > 0");
  if (config.fitting.samples < 2) throw ContractViolation("fitting needs at least 2 samples");
  for (const auto& o : obstacles) o.validate();
  shape();  // validates the penalty shapes
}

std::string to_string(RepairStatus s) {
  switch (s) {
    case RepairStatus::kOk: return "ok";
    case RepairStatus::kUnresolvedCollision: return "unresolved-collision";
    case RepairStatus::kOptimizerFailure: return "optimizer-failure";
  }
  return "unknown";
}

int junction_segment(const UniformBSpline& reference, double t_rep) {
  if (!(t_rep >= reference.t_start()) || !(t_rep < reference.t_end()))
    throw ContractViolation("t_rep must lie in [t_0, t_h)");
  const double x = (t_rep - reference.t_start()) / reference.knot_interval();
  return static_cast<int>(std::ceil(x - 1e-9));
}

UniformBSpline suffix_from_segment(const UniformBSpline& spline, int k) {
  const auto pts = spline.control_points();
  return UniformBSpline(spline.degree(), std::vector<FrenetPoint>(pts.begin() + k, pts.end()),
                        spline.knot_interval(), spline.t_start() + k * spline.knot_interval());
}

UniformBSpline stitch(const UniformBSpline& reference, const UniformBSpline& suffix, double t_rep,
                      double tolerance) {
  const int k = junction_segment(reference, t_rep);
  const int p = reference.degree();
  const double t_j = reference.t_start() + k * reference.knot_interval();
  if (suffix.degree() != p || suffix.knot_interval() != reference.knot_interval())
    throw StitchError("suffix degree or knot interval differs from the reference");
  if (std::abs(suffix.t_start() - t_j) > 1e-9 * std::max(1.0, std::abs(t_j)))
    throw StitchError("suffix must start at the junction knot t = " + std::to_string(t_j));
  if (k + p > reference.num_controls())
    throw StitchError("reference has no junction control points left at t_rep");
  for (int r = 0; r < p; ++r) {
    if ((suffix.control_point(r) - reference.control_point(k + r)).norm() > tolerance)
      throw StitchError("junction control point " + std::to_string(k + r) + " differs");
  }
  std::vector<FrenetPoint> controls(reference.control_points().begin(),
                                    reference.control_points().begin() + k);
  controls.insert(controls.end(), suffix.control_points().begin(), suffix.control_points().end());
  return reference.with_control_points(std::move(controls));
}

namespace {

// The optimiser works on the acceleration control points of the free range
// instead of the positions: Q_i = 2 Q_{i-1} - Q_{i-2} + dt^2 u_i, seeded by
// the two frozen points before the range. Smoothness is then close to a
// diagonal quadratic, so a shift of the whole tail is one cheap direction.
struct AccelParam {
  FreeRange free;
  double dt;

  Eigen::VectorXd pack(const std::vector<FrenetPoint>& controls) const {
    Eigen::VectorXd u(2 * (free.end - free.begin));
    const double s = 1.0 / (dt * dt);
    for (int i = free.begin; i < free.end; ++i)
      u.segment<2>(2 * (i - free.begin)) = s * (controls[i] - 2.0 * controls[i - 1] + controls[i - 2]);
    return u;
  }

  void unpack(const Eigen::VectorXd& u, std::vector<FrenetPoint>& controls) const {
    const double s = dt * dt;
    for (int i = free.begin; i < free.end; ++i)
      controls[i] = 2.0 * controls[i - 1] - controls[i - 2] + s * u.segment<2>(2 * (i - free.begin));
  }

  // Adjoint of unpack: dQ_i/du_m = dt^2 (i - m + 1) for i >= m.
  void gather(const std::vector<Vec2>& grad, Eigen::VectorXd& out) const {
    Vec2 s1 = Vec2::Zero();
    Vec2 s2 = Vec2::Zero();
    for (int i = free.end - 1; i >= free.begin; --i) {
      s1 += grad[i];
      s2 += s1;
      out.segment<2>(2 * (i - free.begin)) = dt * dt * s2;
    }
  }
};

// Factor by which the suffix duration must grow for the sampled speed,
// acceleration and jerk to reach their limits.
double limit_exceed_ratio(const UniformBSpline& suffix, const VehicleLimits& limits, double dt) {
  double ratio = 1.0;
  for (const auto& s : sample(suffix, dt)) {
    ratio = std::max(ratio, s.velocity.norm() / limits.v_max);
    ratio = std::max(ratio, std::sqrt(s.acceleration.norm() / limits.a_max));
    ratio = std::max(ratio, std::cbrt(s.jerk.norm() / limits.j_max));
  }
  return ratio;
}

// Face used against obstacle j near control index `near`: that of the closest
// existing anchor, or the shallowest face for q when there is none.
Face escape_face(const std::vector<AnchorPair>& anchors, int j, int near, const FrenetPoint& q,
                 const Rect& rect) {
  std::optional<Face> face;
  int best = std::numeric_limits<int>::max();
  for (const auto& a : anchors) {
    if (a.obstacle_index != j) continue;
    const auto f = face_of(a);
    if (f && std::abs(a.control_index - near) < best) {
      best = std::abs(a.control_index - near);
      face = f;
    }
  }
  if (face) return *face;
  Face shallow = Face::kRear;
  for (Face f : {Face::kFront, Face::kRight, Face::kLeft})
    if (face_depth(q, rect, f) < face_depth(q, rect, shallow)) shallow = f;
  return shallow;
}

// Sampled points of `current` after t_j that are still inside an obstacle
// move the anchor planes of their supporting free controls outward by the
// sample's depth, creating pairs where a control had none. Returns the number
// of pairs created or moved.
std::size_t refresh_anchors(const UniformBSpline& current, double t_j, FreeRange free,
                            const RepairProblem& problem, std::vector<AnchorPair>& anchors,
                            std::set<std::pair<int, int>>& paired) {
  const auto& cfg = problem.config;
  std::map<std::pair<int, int>, std::pair<double, Face>> push;  // (control, obstacle)
  for (double t : sample_times(t_j, current.t_end(), cfg.collision_check_dt)) {
    const FrenetPoint q = current.evaluate(t);
    const int seg = current.segment_index(t);
    for (int j = 0; j < static_cast<int>(problem.obstacles.size()); ++j) {
      const auto rect = occupancy_at(problem.obstacles[j], t, cfg.horizon);
      if (!rect || !rect->contains(q)) continue;
      const Face f = escape_face(anchors, j, seg + current.degree() / 2, q, *rect);
      const double depth = face_depth(q, *rect, f);
      for (int i = seg; i <= seg + current.degree(); ++i) {
        if (!free.contains(i)) continue;
        auto [it, fresh] = push.try_emplace({i, j}, depth, f);
        if (!fresh) it->second.first = std::max(it->second.first, depth);
      }
    }
  }

  std::size_t changed = 0;
  for (const auto& [key, value] : push) {
    const auto [i, j] = key;
    const auto [depth, f] = value;
    auto it = std::find_if(anchors.begin(), anchors.end(), [&](const AnchorPair& a) {
      return a.control_index == i && a.obstacle_index == j;
    });
    if (it == anchors.end()) {
      const auto rect = occupancy_at(problem.obstacles[j], current.control_time(i), cfg.horizon);
      if (!rect) continue;
      AnchorPair a = face_anchor(current.control_point(i), *rect, f);
      a.obstacle_index = j;
      a.obstacle_id = problem.obstacles[j].id;
      a.control_index = i;
      paired.emplace(i, j);
      anchors.push_back(std::move(a));
      it = anchors.end() - 1;
    }
    it->p += it->v * depth;
    ++changed;
  }
  return changed;
}

}  // namespace

RepairCandidate plan(const RepairProblem& problem, double t_rep) {
  const UniformBSpline& ref = problem.reference;
  const auto& cfg = problem.config;
  const int k = junction_segment(ref, t_rep);
  const int p = ref.degree();
  const int n = ref.num_controls();
  const double t_j = ref.t_start() + k * ref.knot_interval();
  const FeasibilityShape shape = problem.shape();

  RepairCandidate cand{ref, ref, ref, {}, {}, t_rep, t_j, k + p, 1.0, 0, RepairStatus::kOk, {}};
  auto suffix_collides = [&](const UniformBSpline& s) {
    const int seg = std::min(k, s.num_segments() - 1);
    return detect_collision(suffix_from_segment(s, seg), problem.obstacles,
                            cfg.collision_check_dt, cfg.horizon)
        .collides();
  };

  if (k + p >= n) {
    if (suffix_collides(ref)) {
      cand.status = RepairStatus::kUnresolvedCollision;
      cand.message = "no free control points after t_rep";
    }
    return cand;
  }

  const FreeRange free{k + p, n};
  std::vector<FrenetPoint> controls(ref.control_points().begin(), ref.control_points().end());
  std::vector<AnchorPair> anchors;
  std::set<std::pair<int, int>> paired;  // (control, obstacle)
  const AccelParam param{free, ref.knot_interval()};

  try {
    // Deformation.
    bool colliding = suffix_collides(ref);
    for (int round = 0; round < cfg.anchor_rounds; ++round) {
      const UniformBSpline current = ref.with_control_points(controls);
      std::vector<ControlRef> refs;
      for (int i = free.begin; i < free.end; ++i)
        refs.push_back({i, controls[i], current.control_time(i)});
      std::size_t added = 0;
      for (auto& a : anchor_pairs(refs, problem.obstacles, problem.deformation_weights.s_f,
                                  cfg.faces, cfg.horizon)) {
        if (paired.emplace(a.control_index, a.obstacle_index).second) {
          anchors.push_back(std::move(a));
          ++added;
        }
      }
      if (round > 0) added += refresh_anchors(current, t_j, free, problem, anchors, paired);
      if (added == 0) break;

      DeformationContext ctx{anchors, problem.deformation_weights, shape, free};
      const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        std::vector<FrenetPoint> trial = controls;
        param.unpack(x, trial);
        const CostBreakdown c = total_deformation_cost(ref.with_control_points(std::move(trial)), ctx);
        param.gather(c.gradient, grad);
        return c.total;
      };
      OptimizeOutcome outcome = minimize(objective, param.pack(controls), cfg.optimizer);
      param.unpack(outcome.x, controls);
      cand.deformation_rounds.push_back(std::move(outcome));
      colliding = suffix_collides(ref.with_control_points(controls));
      if (!colliding) break;
    }
    cand.anchor_count = anchors.size();
    cand.deformed = ref.with_control_points(controls);
    if (colliding) {
      cand.status = RepairStatus::kUnresolvedCollision;
      cand.message = "deformed trajectory still collides after " +
                     std::to_string(cand.deformation_rounds.size()) + " rounds";
    }

    // Time reallocation.
    const UniformBSpline deformed_suffix = suffix_from_segment(cand.deformed, k);
    const double ratio = limit_exceed_ratio(deformed_suffix, problem.limits, cfg.collision_check_dt);
    const int segments = deformed_suffix.num_segments();
    const int new_segments =
        ratio > 1.0 ? static_cast<int>(std::ceil(segments * ratio - 1e-9)) : segments;
    cand.duration_scale = static_cast<double>(new_segments) / segments;

    if (anchors.empty() && new_segments == segments && !colliding) {
      // Nothing to repair.
      cand.refined = cand.deformed;
      cand.trajectory = cand.deformed;
      return cand;
    }

    std::vector<FrenetPoint> init(controls.begin(), controls.begin() + free.begin);
    const int n_new = k + p + new_segments;
    if (new_segments == segments) {
      init.assign(controls.begin(), controls.end());
    } else {
      const UniformBSpline layout = ref.with_control_points(
          std::vector<FrenetPoint>(n_new, FrenetPoint::Zero()));
      const double scale = cand.duration_scale;
      for (int i = free.begin; i < n_new; ++i) {
        const double t = t_j + (layout.control_time(i) - t_j) / scale;
        init.push_back(cand.deformed.evaluate(std::clamp(t, t_j, cand.deformed.t_end())));
      }
    }

    // Refinement.
    const FreeRange refine_free{k + p, n_new};
    RefinementContext rctx{&cand.deformed, t_j, t_j, problem.refinement_weights, shape,
                           cfg.fitting, refine_free};
    const UniformBSpline layout = ref.with_control_points(init);
    const AccelParam refine_param{refine_free, ref.knot_interval()};
    const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      std::vector<FrenetPoint> trial = init;
      refine_param.unpack(x, trial);
      const CostBreakdown c = total_refinement_cost(layout.with_control_points(std::move(trial)), rctx);
      refine_param.gather(c.gradient, grad);
      return c.total;
    };
    cand.refinement = minimize(objective, refine_param.pack(init), cfg.optimizer);
    std::vector<FrenetPoint> refined = init;
    refine_param.unpack(cand.refinement.x, refined);
    cand.refined = layout.with_control_points(std::move(refined));
    cand.trajectory = stitch(ref, suffix_from_segment(cand.refined, k), t_rep);
  } catch (const OptimizerError& e) {
    cand.status = RepairStatus::kOptimizerFailure;
    cand.message = e.what();
    cand.trajectory = ref;
  }
  return cand;
}

}  // namespace trajrepair
