#include "trajrepair/costs.hpp"

#include "trajrepair/errors.hpp"

#include <cmath>
#include <string>

namespace trajrepair {

void CostWeights::validate() const {
  const double all[] = {lambda_s, lambda_c, lambda_d, lambda_f, w_v, w_a, w_j};
  for (double w : all)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractViolation("cost weights must be >= 0");
  if (!(s_f > 0.0)) throw ContractViolation("clearance s_f must be > 0");
}

PenaltyShape PenaltyShape::make(double c_m, double elastic_lambda, double epsilon,
                                double transition_ratio) {
  PenaltyShape s;
  s.c_m = c_m;
  s.elastic_lambda = elastic_lambda;
  s.epsilon = epsilon;
  s.c_j = transition_ratio * c_m;
  const double delta = s.c_j - elastic_lambda * c_m;
  s.a2 = 3.0 * delta;
  s.b2 = 3.0 * delta * delta - 6.0 * delta * s.c_j;
  s.c2 = delta * delta * delta - s.a2 * s.c_j * s.c_j - s.b2 * s.c_j;
  s.a1 = s.a2;
  s.b1 = -s.b2;
  s.c1 = s.c2;
  s.validate();
  return s;
}

void PenaltyShape::validate() const {
  if (!(c_m > 0.0)) throw ContractViolation("penalty limit c_m must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0, 1)");
  if (!(elastic_lambda > 0.0 && elastic_lambda < 1.0 - epsilon))
    throw ContractViolation("elastic lambda must lie in (0, 1 - epsilon)");
  if (!(c_j > elastic_lambda * c_m))
    throw ContractViolation("transition point c_j must exceed elastic_lambda * c_m");
}

FeasibilityShape FeasibilityShape::from_limits(double v_max, double a_max, double j_max,
                                               const ShapeParams& params) {
  FeasibilityShape out;
  const double limits[3] = {v_max, a_max, j_max};
  for (int k = 0; k < 3; ++k)
    out.orders[k] = PenaltyShape::make(limits[k], params.elastic_lambda, params.epsilon,
                                       params.transition_ratio);
  return out;
}

PenaltyValue collision_penalty_branch(CollisionBranch branch, double c, double s_f) {
  switch (branch) {
    case CollisionBranch::kClear:
      return {};
    case CollisionBranch::kCubic:
      return {c * c * c, 3.0 * c * c, 6.0 * c};
    case CollisionBranch::kQuadratic:
      return {3.0 * s_f * c * c - 3.0 * s_f * s_f * c + s_f * s_f * s_f,
              6.0 * s_f * c - 3.0 * s_f * s_f, 6.0 * s_f};
  }
  return {};
}

PenaltyValue collision_penalty(double c, double s_f) {
  if (c <= 0.0) return collision_penalty_branch(CollisionBranch::kClear, c, s_f);
  if (c <= s_f) return collision_penalty_branch(CollisionBranch::kCubic, c, s_f);
  return collision_penalty_branch(CollisionBranch::kQuadratic, c, s_f);
}

PenaltyValue feasibility_penalty(double c, const PenaltyShape& s) {
  const double band = s.elastic_lambda * s.c_m;
  if (c <= -s.c_j) return {s.a1 * c * c + s.b1 * c + s.c1, 2.0 * s.a1 * c + s.b1, 2.0 * s.a1};
  if (c < -band) {
    const double e = -band - c;
    return {e * e * e, -3.0 * e * e, 6.0 * e};
  }
  if (c <= band) return {};
  if (c < s.c_j) {
    const double e = c - band;
    return {e * e * e, 3.0 * e * e, 6.0 * e};
  }
  return {s.a2 * c * c + s.b2 * c + s.c2, 2.0 * s.a2 * c + s.b2, 2.0 * s.a2};
}

namespace {

void mask(std::vector<Vec2>& grad, FreeRange free) {
  for (int i = 0; i < static_cast<int>(grad.size()); ++i)
    if (!free.contains(i)) grad[i].setZero();
}

// Pulls a gradient on the order-th differenced points back onto the controls.
std::vector<Vec2> pull_back(std::vector<Vec2> grad, int order, double dt) {
  for (int o = 0; o < order; ++o) grad = difference_adjoint(grad, dt);
  return grad;
}

void add_into(std::vector<Vec2>& into, const std::vector<Vec2>& from, double scale = 1.0) {
  for (std::size_t i = 0; i < into.size() && i < from.size(); ++i) into[i] += scale * from[i];
}

}  // namespace

CostTerm smoothness_cost(const UniformBSpline& spline, FreeRange free) {
  const double dt = spline.knot_interval();
  const int n = spline.num_controls();
  const auto vel = difference(spline.control_points(), dt);
  const auto acc = difference(vel, dt);
  const auto jerk = difference(acc, dt);

  CostTerm out;
  out.gradient.assign(n, Vec2::Zero());
  std::vector<Vec2> g_acc(acc.size()), g_jerk(jerk.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out.value += acc[i].squaredNorm();
    g_acc[i] = 2.0 * acc[i];
  }
  for (std::size_t i = 0; i < jerk.size(); ++i) {
    out.value += jerk[i].squaredNorm();
    g_jerk[i] = 2.0 * jerk[i];
  }
  if (!acc.empty()) add_into(out.gradient, pull_back(g_acc, 2, dt));
  if (!jerk.empty()) add_into(out.gradient, pull_back(g_jerk, 3, dt));
  mask(out.gradient, free);
  return out;
}

CostTerm collision_cost(std::span<const FrenetPoint> controls, std::span<const AnchorPair> anchors,
                        double s_f, FreeRange free) {
  CostTerm out;
  out.gradient.assign(controls.size(), Vec2::Zero());
  for (const auto& a : anchors) {
    if (a.control_index < 0 || a.control_index >= static_cast<int>(controls.size()))
      throw ContractViolation("anchor pair references control point " +
                              std::to_string(a.control_index) + " out of range");
    const double d = obstacle_distance(controls[a.control_index], a);
    const PenaltyValue pv = collision_penalty(s_f - d, s_f);
    out.value += pv.value;
    // dc/dQ = -v
    out.gradient[a.control_index] -= pv.d1 * a.v;
  }
  mask(out.gradient, free);
  return out;
}

CostTerm feasibility_cost(const UniformBSpline& spline, const FeasibilityShape& shape,
                          const CostWeights& weights, FreeRange free) {
  const double dt = spline.knot_interval();
  const double w[3] = {weights.w_v, weights.w_a, weights.w_j};

  CostTerm out;
  out.gradient.assign(spline.num_controls(), Vec2::Zero());
  std::vector<FrenetPoint> pts(spline.control_points().begin(), spline.control_points().end());
  for (int order = 1; order <= 3; ++order) {
    pts = difference(pts, dt);
    if (pts.empty()) break;
    if (w[order - 1] == 0.0) continue;
    const PenaltyShape& s = shape.orders[order - 1];
    std::vector<Vec2> g(pts.size(), Vec2::Zero());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int r = 0; r < 2; ++r) {
        const PenaltyValue pv = feasibility_penalty(pts[i][r], s);
        out.value += w[order - 1] * pv.value;
        g[i][r] = w[order - 1] * pv.d1;
      }
    }
    add_into(out.gradient, pull_back(std::move(g), order, dt));
  }
  mask(out.gradient, free);
  return out;
}

CostTerm fitting_cost(const UniformBSpline& candidate, const UniformBSpline& reference,
                      const FittingOptions& options, FreeRange free) {
  return fitting_cost(candidate, candidate.t_start(), reference, reference.t_start(), options, free);
}

CostTerm fitting_cost(const UniformBSpline& candidate, double cand_from,
                      const UniformBSpline& reference, double ref_from,
                      const FittingOptions& options, FreeRange free) {
  if (options.samples < 2) throw ContractViolation("fitting needs at least 2 samples");
  const double cand_span = candidate.t_end() - cand_from;
  const double ref_span = reference.t_end() - ref_from;
  if (cand_span < 0.0 || ref_span < 0.0)
    throw ContractViolation("fitting window starts past the curve end");

  const UniformBSpline ref_vel = reference.derivative(1);
  CostTerm out;
  out.gradient.assign(candidate.num_controls(), Vec2::Zero());
  const int k_max = options.samples - 1;
  for (int k = 0; k <= k_max; ++k) {
    const double alpha = static_cast<double>(k) / k_max;
    const double t_cand = k == k_max ? candidate.t_end() : cand_from + alpha * cand_span;
    const double t_ref = k == k_max ? reference.t_end() : ref_from + alpha * ref_span;

    const ActiveBasis basis_row = candidate.active_basis(t_cand);
    FrenetPoint pos = FrenetPoint::Zero();
    for (std::size_t r = 0; r < basis_row.weights.size(); ++r)
      pos += basis_row.weights[r] * candidate.control_point(basis_row.first_control + r);
    const Vec2 e = pos - reference.evaluate(t_ref);

    Vec2 g;
    const Vec2 tangent = ref_vel.evaluate(t_ref);
    const double tn = tangent.norm();
    if (tn > 1e-9) {
      const Vec2 u = tangent / tn;
      const double d_a = e.dot(u);
      const Vec2 d_r = e - d_a * u;
      out.value += options.axial_weight * d_a * d_a + options.radial_weight * d_r.squaredNorm();
      g = 2.0 * options.axial_weight * d_a * u + 2.0 * options.radial_weight * d_r;
    } else {
      out.value += e.squaredNorm();
      g = 2.0 * e;
    }
    for (std::size_t r = 0; r < basis_row.weights.size(); ++r)
      out.gradient[basis_row.first_control + r] += basis_row.weights[r] * g;
  }
  mask(out.gradient, free);
  return out;
}

CostBreakdown total_deformation_cost(const UniformBSpline& spline, const DeformationContext& ctx) {
  const auto& w = ctx.weights;
  CostBreakdown out;
  out.gradient.assign(spline.num_controls(), Vec2::Zero());
  if (w.lambda_s != 0.0) {
    auto t = smoothness_cost(spline, ctx.free);
    out.smoothness = t.value;
    add_into(out.gradient, t.gradient, w.lambda_s);
  }
  if (w.lambda_c != 0.0) {
    auto t = collision_cost(spline.control_points(), ctx.anchors, w.s_f, ctx.free);
    out.collision = t.value;
    add_into(out.gradient, t.gradient, w.lambda_c);
  }
  if (w.lambda_d != 0.0) {
    auto t = feasibility_cost(spline, ctx.shape, w, ctx.free);
    out.feasibility = t.value;
    add_into(out.gradient, t.gradient, w.lambda_d);
  }
  out.total = w.lambda_s * out.smoothness + w.lambda_c * out.collision + w.lambda_d * out.feasibility;
  return out;
}

CostBreakdown total_refinement_cost(const UniformBSpline& spline, const RefinementContext& ctx) {
  const auto& w = ctx.weights;
  CostBreakdown out;
  out.gradient.assign(spline.num_controls(), Vec2::Zero());
  if (w.lambda_s != 0.0) {
    auto t = smoothness_cost(spline, ctx.free);
    out.smoothness = t.value;
    add_into(out.gradient, t.gradient, w.lambda_s);
  }
  if (w.lambda_d != 0.0) {
    auto t = feasibility_cost(spline, ctx.shape, w, ctx.free);
    out.feasibility = t.value;
    add_into(out.gradient, t.gradient, w.lambda_d);
  }
  if (w.lambda_f != 0.0) {
    if (ctx.target == nullptr) throw ContractViolation("refinement needs a target curve");
    auto t = fitting_cost(spline, ctx.candidate_from, *ctx.target, ctx.target_from, ctx.fitting,
                          ctx.free);
    out.fitting = t.value;
    add_into(out.gradient, t.gradient, w.lambda_f);
  }
  out.total = w.lambda_s * out.smoothness + w.lambda_d * out.feasibility + w.lambda_f * out.fitting;
  return out;
}

}  // namespace trajrepair
