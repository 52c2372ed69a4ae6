#pragma once

#include "trajrepair/bspline.hpp"
#include "trajrepair/cspace.hpp"

#include <array>
#include <span>
#include <vector>

namespace trajrepair {

struct CostWeights {
  double lambda_s = 1.0;   // smoothness
  double lambda_c = 15.0;  // collision
  double lambda_d = 1.0;   // feasibility
  double lambda_f = 0.0;   // fitting
  double w_v = 1.0;
  double w_a = 1.0;
  double w_j = 1.0;
  double s_f = 1.0;  // clearance threshold, m

  void validate() const;
};

// Piecewise penalty on one derivative component: zero inside
// [-elastic_lambda * c_m, elastic_lambda * c_m], cubic out to +-c_j, then
// quadratic. The quadratic pieces match value, slope and curvature of the
// cubic at +-c_j, and the function is even.
struct PenaltyShape {
  double c_m = 1.0;
  double c_j = 1.2;
  double elastic_lambda = 0.95;
  double epsilon = 0.01;
  double a1 = 0, b1 = 0, c1 = 0;  // c <= -c_j
  double a2 = 0, b2 = 0, c2 = 0;  // c >= c_j

  static PenaltyShape make(double c_m, double elastic_lambda = 0.95, double epsilon = 0.01,
                           double transition_ratio = 1.2);
  void validate() const;
};

struct ShapeParams {
  double elastic_lambda = 0.95;
  double epsilon = 0.01;
  double transition_ratio = 1.2;  // c_j / c_m
};

// Shapes for the velocity, acceleration and jerk control points, in that order.
struct FeasibilityShape {
  std::array<PenaltyShape, 3> orders;

  static FeasibilityShape from_limits(double v_max, double a_max, double j_max,
                                      const ShapeParams& params = {});
};

struct PenaltyValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class CollisionBranch { kClear, kCubic, kQuadratic };

// j_c as a function of c = s_f - d.
PenaltyValue collision_penalty(double c, double s_f);
// One branch's polynomial evaluated at c, regardless of which range c is in.
PenaltyValue collision_penalty_branch(CollisionBranch branch, double c, double s_f);

PenaltyValue feasibility_penalty(double c, const PenaltyShape& shape);

// Half-open range [begin, end) of optimised control points.
struct FreeRange {
  int begin = 0;
  int end = 0;
  static FreeRange all(int n) { return {0, n}; }
  bool contains(int i) const { return i >= begin && i < end; }
};

// One cost term; gradient has one entry per control point, zero outside the
// free range.
struct CostTerm {
  double value = 0.0;
  std::vector<Vec2> gradient;
};

CostTerm smoothness_cost(const UniformBSpline& spline, FreeRange free);

CostTerm collision_cost(std::span<const FrenetPoint> controls, std::span<const AnchorPair> anchors,
                        double s_f, FreeRange free);

CostTerm feasibility_cost(const UniformBSpline& spline, const FeasibilityShape& shape,
                          const CostWeights& weights, FreeRange free);

struct FittingOptions {
  int samples = 32;
  double axial_weight = 1.0;
  double radial_weight = 10.0;
};

// Anisotropic displacement between candidate(cand_from + a * T') and
// reference(ref_from + a * T) for a in {0, 1/(K-1), ..., 1}, where T' and T
// run to each curve's domain end.
CostTerm fitting_cost(const UniformBSpline& candidate, const UniformBSpline& reference,
                      const FittingOptions& options, FreeRange free);
CostTerm fitting_cost(const UniformBSpline& candidate, double cand_from,
                      const UniformBSpline& reference, double ref_from,
                      const FittingOptions& options, FreeRange free);

struct CostBreakdown {
  double total = 0.0;
  double smoothness = 0.0;
  double collision = 0.0;
  double feasibility = 0.0;
  double fitting = 0.0;
  std::vector<Vec2> gradient;
};

struct DeformationContext {
  std::span<const AnchorPair> anchors;
  CostWeights weights;
  FeasibilityShape shape;
  FreeRange free;
};

CostBreakdown total_deformation_cost(const UniformBSpline& spline, const DeformationContext& ctx);

struct RefinementContext {
  const UniformBSpline* target = nullptr;  // the deformed curve being fitted
  double candidate_from = 0.0;
  double target_from = 0.0;
  CostWeights weights;
  FeasibilityShape shape;
  FittingOptions fitting;
  FreeRange free;
};

CostBreakdown total_refinement_cost(const UniformBSpline& spline, const RefinementContext& ctx);

}  // namespace trajrepair
