#include "trajrepair/cspace.hpp"
#include "trajrepair/errors.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace trajrepair {
namespace {

using testing::static_box;
using testing::straight_line;

ObstaclePrediction moving_box() {
  ObstaclePrediction o;
  o.id = "mover";
  o.frames = {{0.0, {0.0, 0.0}, 1.0, 0.5}, {1.0, {10.0, 0.0}, 2.0, 1.5}, {2.0, {10.0, 4.0}, 2.0, 1.5}};
  return o;
}

TEST(Vehicle, TurnRadiusAndCurvature) {
  VehicleParams v;
  v.wheelbase = 2.0;
  v.max_steering = std::atan(0.5);
  EXPECT_NEAR(v.min_turn_radius(), 4.0, 1e-12);
  EXPECT_NEAR(v.max_curvature(), 0.25, 1e-12);
  v.max_steering = 1.6;
  EXPECT_THROW(v.validate(), ContractViolation);
  v.max_steering = 0.5;
  v.wheelbase = 0.0;
  EXPECT_THROW(v.validate(), ContractViolation);
}

TEST(Inflation, AddsOffsetsPerSide) {
  const ObstaclePrediction raw = static_box("a", 5, 1, 2.0, 1.0);
  const ObstaclePrediction inf = inflate(raw, {2.25, 0.5});
  EXPECT_DOUBLE_EQ(inf.frames[0].half_extent_s, 4.25);
  EXPECT_DOUBLE_EQ(inf.frames[0].half_extent_l, 1.5);
  EXPECT_THROW((InflationConfig{-1.0, 0.0}).validate(), ContractViolation);
}

TEST(Occupancy, FrameTimesReproduceFramesExactly) {
  const ObstaclePrediction o = moving_box();
  for (const auto& f : o.frames) {
    const Rect r = occupancy_at(o, f.t);
    EXPECT_EQ(r.center, f.center);
    EXPECT_EQ(r.half_s, f.half_extent_s);
    EXPECT_EQ(r.half_l, f.half_extent_l);
  }
}

TEST(Occupancy, LinearInterpolation) {
  const Rect r = occupancy_at(moving_box(), 0.25);
  EXPECT_DOUBLE_EQ(r.center.x(), 2.5);
  EXPECT_DOUBLE_EQ(r.half_s, 1.25);
  EXPECT_DOUBLE_EQ(r.half_l, 0.75);
}

TEST(Occupancy, StaticIsConstant) {
  const ObstaclePrediction o = static_box("s", 3, 2, 1, 1);
  for (double t : {-10.0, 0.0, 3.3, 100.0}) EXPECT_EQ(occupancy_at(o, t).center, FrenetPoint(3, 2));
}

TEST(Occupancy, HorizonHandling) {
  const ObstaclePrediction o = moving_box();
  EXPECT_THROW(occupancy_at(o, -0.1), HorizonError);
  EXPECT_THROW(occupancy_at(o, 2.1), HorizonError);
  EXPECT_FALSE(occupancy_at(o, 2.1, HorizonPolicy::kVanish).has_value());
  const auto held = occupancy_at(o, 5.0, HorizonPolicy::kPersist);
  ASSERT_TRUE(held.has_value());
  EXPECT_EQ(held->center, FrenetPoint(10, 4));
}

TEST(Obstacle, ValidateRejectsBadFrames) {
  ObstaclePrediction o = moving_box();
  o.frames[1].t = 0.0;
  EXPECT_THROW(o.validate(), ContractViolation);
  o = moving_box();
  o.frames[0].half_extent_s = 0.0;
  EXPECT_THROW(o.validate(), ContractViolation);
}

TEST(DetectCollision, NoObstaclesIsInfinite) {
  const auto r = detect_collision(straight_line(10, 6), {}, 0.05);
  EXPECT_TRUE(std::isinf(r.ttc));
  EXPECT_FALSE(r.collides());
}

TEST(DetectCollision, StartInsideIsZero) {
  const std::vector<ObstaclePrediction> obs{static_box("b", 0.5, 0, 2, 1)};
  const auto r = detect_collision(straight_line(10, 6), obs, 0.05);
  EXPECT_EQ(r.ttc, 0.0);
  EXPECT_EQ(r.obstacle_id, "b");
}

TEST(DetectCollision, ClosedFormCrossingTime) {
  // Near face at s = 29, ego at 10 m/s: entry just after 2.9 s.
  const std::vector<ObstaclePrediction> obs{static_box("wall", 31, 0, 2, 2)};
  const double dt = 0.05;
  const auto r = detect_collision(straight_line(10, 6), obs, dt);
  EXPECT_NEAR(r.ttc, 2.9, dt + 1e-9);
  EXPECT_GT(r.ttc, 2.9);
}

TEST(DetectCollision, MonotoneInInflation) {
  const UniformBSpline ref = straight_line(10, 6, 0.4, 0.3);
  std::mt19937 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const ObstaclePrediction raw = static_box("x", testing::uniform_in(rng, 5, 55),
                                              testing::uniform_in(rng, -3, 3), 1.0, 0.5);
    double prev = kInfinity;
    for (double off : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const std::vector<ObstaclePrediction> obs{inflate(raw, {off, off})};
      const double ttc = detect_collision(ref, obs, 0.05).ttc;
      EXPECT_LE(ttc, prev);
      prev = ttc;
    }
  }
}

TEST(DetectCollision, RejectsNonPositiveStep) {
  EXPECT_THROW(detect_collision(straight_line(10, 2), {}, 0.0), ContractViolation);
}

TEST(Distance, DirectEvaluation) {
  AnchorPair a;
  a.p = {3, 4};
  a.v = {0.6, 0.8};
  EXPECT_NEAR(obstacle_distance({0, 0}, a), -5.0, 1e-12);
  EXPECT_NEAR(obstacle_distance(a.p, a), 0.0, 1e-15);
  EXPECT_NEAR(obstacle_distance(a.p + 2.0 * a.v, a), 2.0, 1e-12);
  AnchorPair b;
  b.p = {1, 0};
  b.v = {0, 1};
  EXPECT_DOUBLE_EQ(obstacle_distance({1, 1}, b), 1.0);
}

TEST(Distance, AffineAlongDirection) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    AnchorPair a;
    a.p = {testing::uniform_in(rng, -5, 5), testing::uniform_in(rng, -5, 5)};
    const double ang = testing::uniform_in(rng, 0, 6.28);
    a.v = {std::cos(ang), std::sin(ang)};
    const FrenetPoint q(testing::uniform_in(rng, -5, 5), testing::uniform_in(rng, -5, 5));
    const double alpha = testing::uniform_in(rng, -3, 3);
    EXPECT_NEAR(obstacle_distance(q + alpha * a.v, a), obstacle_distance(q, a) + alpha, 1e-12);
  }
}

TEST(Anchor, NearestFaceFromInside) {
  const Rect r{{0, 0}, 4.0, 1.0};
  const AnchorPair a = nearest_anchor({0.0, 0.3}, r);
  EXPECT_DOUBLE_EQ(a.p.y(), 1.0);
  EXPECT_DOUBLE_EQ(a.p.x(), 0.0);
  EXPECT_EQ(a.v, Vec2(0, 1));
  EXPECT_LT(obstacle_distance({0.0, 0.3}, a), 0.0);
}

TEST(Anchor, OutsideSignPositiveAndUnitLength) {
  std::mt19937 rng(8);
  const Rect r{{2, -1}, 3.0, 1.5};
  for (int trial = 0; trial < 200; ++trial) {
    const FrenetPoint q(testing::uniform_in(rng, -6, 10), testing::uniform_in(rng, -6, 4));
    const AnchorPair a = nearest_anchor(q, r);
    EXPECT_NEAR(a.v.norm(), 1.0, 1e-9);
    const double d = obstacle_distance(q, a);
    if (r.contains(q)) {
      EXPECT_LT(d, 0.0);
    } else {
      EXPECT_NEAR(d, r.outside_distance(q), 1e-9);
    }
  }
}

TEST(Anchor, BoundaryBandGivesClearanceDistance) {
  const Rect r{{0, 0}, 1.0, 1.0};
  const double s_f = 1.0;
  const FrenetPoint q(1.0 + s_f, 0.0);
  const AnchorPair a = nearest_anchor(q, r);
  EXPECT_DOUBLE_EQ(obstacle_distance(q, a), s_f);
}

TEST(Anchor, PairsCoverInsideAndBandOnly) {
  const std::vector<ObstaclePrediction> obs{static_box("o", 10, 0, 2, 1)};
  const std::vector<ControlRef> controls{
      {0, {0, 0}, 0.0}, {1, {7.5, 0}, 0.4}, {2, {9, 0.2}, 0.8}, {3, {11, 0.1}, 1.2}, {4, {20, 0}, 1.6}};
  const auto pairs = anchor_pairs(controls, obs, 1.0, FaceSelection::kNearest);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].control_index, 1);
  EXPECT_EQ(pairs[2].control_index, 3);
  for (const auto& p : pairs) {
    EXPECT_EQ(p.obstacle_id, "o");
    EXPECT_NEAR(p.v.norm(), 1.0, 1e-12);
  }
  EXPECT_TRUE(anchor_pairs({}, obs, 1.0).empty());
}

TEST(Anchor, RunConsistentUsesOneFace) {
  const std::vector<ObstaclePrediction> obs{static_box("o", 10, 0, 2, 5)};
  // Nearest faces would split between rear and front.
  const std::vector<ControlRef> controls{{3, {8.5, 0}, 0.0}, {4, {10.0, 0}, 0.4}, {5, {11.5, 0}, 0.8}};
  const auto nearest = anchor_pairs(controls, obs, 1.0, FaceSelection::kNearest);
  ASSERT_EQ(nearest.size(), 3u);
  EXPECT_NE(face_of(nearest.front()), face_of(nearest.back()));
  const auto runs = anchor_pairs(controls, obs, 1.0, FaceSelection::kRunConsistent);
  ASSERT_EQ(runs.size(), 3u);
  for (const auto& p : runs) EXPECT_EQ(face_of(p), face_of(runs.front()));
}

TEST(Anchor, FaceHelpers) {
  const Rect r{{0, 0}, 2.0, 1.0};
  const FrenetPoint q(0.5, 0.25);
  const AnchorPair rear = face_anchor(q, r, Face::kRear);
  EXPECT_EQ(rear.p, FrenetPoint(-2.0, 0.25));
  EXPECT_EQ(rear.v, Vec2(-1, 0));
  EXPECT_EQ(face_of(rear), Face::kRear);
  EXPECT_DOUBLE_EQ(face_depth(q, r, Face::kRear), 2.5);
  EXPECT_DOUBLE_EQ(face_depth(q, r, Face::kLeft), 0.75);
  EXPECT_NEAR(obstacle_distance(q, rear), -face_depth(q, r, Face::kRear), 1e-12);
  AnchorPair diag;
  diag.v = Vec2(1, 1).normalized();
  EXPECT_FALSE(face_of(diag).has_value());
}

}  // namespace
}  // namespace trajrepair
