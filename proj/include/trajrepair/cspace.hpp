#pragma once

#include "trajrepair/bspline.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trajrepair {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct VehicleParams {
  double wheelbase = 2.6;      // m
  double max_steering = 0.61;  // rad
  double width = 1.7;          // m
  double length = 4.3;         // m

  double min_turn_radius() const;
  double max_curvature() const { return 1.0 / min_turn_radius(); }
  void validate() const;
};

struct InflationConfig {
  double s_offset = 0.0;  // m, added to each longitudinal half extent
  double l_offset = 0.0;  // m, added to each lateral half extent
  void validate() const;
};

// Frenet-aligned rectangle.
struct Rect {
  FrenetPoint center = FrenetPoint::Zero();
  double half_s = 0.0;
  double half_l = 0.0;

  // Strict interior; points on the boundary are clear.
  bool contains(const FrenetPoint& q) const {
    return std::abs(q.x() - center.x()) < half_s && std::abs(q.y() - center.y()) < half_l;
  }
  // Euclidean distance to the rectangle, 0 on or inside it.
  double outside_distance(const FrenetPoint& q) const;
};

struct ObstacleFrame {
  double t = 0.0;
  FrenetPoint center = FrenetPoint::Zero();
  double half_extent_s = 0.0;
  double half_extent_l = 0.0;

  Rect rect() const { return Rect{center, half_extent_s, half_extent_l}; }
};

// Predicted occupancy of one traffic participant. Frames are already
// inflated unless produced by a loader that applies `inflate`.
struct ObstaclePrediction {
  std::string id;
  std::vector<ObstacleFrame> frames;
  bool is_static = false;

  double first_time() const { return frames.front().t; }
  double last_time() const { return frames.back().t; }
  void validate() const;
};

ObstaclePrediction inflate(ObstaclePrediction raw, const InflationConfig& inflation);

enum class HorizonPolicy {
  kPersist,  // hold the first/last frame outside the prediction horizon
  kVanish,   // no occupancy outside the prediction horizon
};

// Linear interpolation of the occupancy between bracketing frames. Throws
// HorizonError outside [first_time, last_time] for dynamic obstacles.
Rect occupancy_at(const ObstaclePrediction& obs, double t);
std::optional<Rect> occupancy_at(const ObstaclePrediction& obs, double t, HorizonPolicy policy);

struct CollisionResult {
  double ttc = kInfinity;    // relative to the trajectory's t_start
  int obstacle_index = -1;   // first conflicting obstacle, -1 when clear
  std::string obstacle_id;

  bool collides() const { return obstacle_index >= 0; }
};

// Earliest sampled time at which the ego point is strictly inside an inflated
// obstacle.
CollisionResult detect_collision(const UniformBSpline& traj,
                                 std::span<const ObstaclePrediction> obstacles, double dt,
                                 HorizonPolicy policy = HorizonPolicy::kPersist);

struct AnchorPair {
  FrenetPoint p = FrenetPoint::Zero();  // on the inflated obstacle surface
  Vec2 v = Vec2::UnitX();               // unit; d grows along v
  int obstacle_index = -1;
  std::string obstacle_id;
  int control_index = -1;
};

struct ControlRef {
  int index = 0;
  FrenetPoint point = FrenetPoint::Zero();
  double t = 0.0;
};

enum class FaceSelection {
  // Closest boundary point per control point.
  kNearest,
  // One escape face per contiguous run of conflicting control points against
  // the same obstacle: the face with the smallest summed penetration.
  kRunConsistent,
};

// Pairs for every (control point, obstacle) conflict: the point is inside the
// obstacle at its time or within `clearance` of it.
std::vector<AnchorPair> anchor_pairs(std::span<const ControlRef> controls,
                                     std::span<const ObstaclePrediction> obstacles,
                                     double clearance,
                                     FaceSelection selection = FaceSelection::kNearest,
                                     HorizonPolicy policy = HorizonPolicy::kPersist);

// Anchor pair for a single control point against one rectangle, closest
// boundary point convention.
AnchorPair nearest_anchor(const FrenetPoint& q, const Rect& rect);

enum class Face { kRear, kFront, kRight, kLeft };  // -s, +s, -l, +l

// Pair on the given face: p is q projected onto the face, v its outward normal.
AnchorPair face_anchor(const FrenetPoint& q, const Rect& rect, Face face);
// Depth of q behind the face plane, positive on the obstacle side.
double face_depth(const FrenetPoint& q, const Rect& rect, Face face);
// Face whose outward normal is v, if v is axis aligned.
std::optional<Face> face_of(const AnchorPair& pair);

inline double obstacle_distance(const FrenetPoint& q, const AnchorPair& pair) {
  return (q - pair.p).dot(pair.v);
}

}  // namespace trajrepair
