#include "trajrepair/cspace.hpp"

#include "trajrepair/errors.hpp"
#include "trajrepair/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace trajrepair {

double VehicleParams::min_turn_radius() const { return wheelbase / std::tan(max_steering); }

void VehicleParams::validate() const {
  if (!(wheelbase > 0.0)) throw ContractViolation("vehicle wheelbase must be > 0");
  if (!(max_steering > 0.0 && max_steering < std::numbers::pi / 2))
    throw ContractViolation("vehicle max steering must lie in (0, pi/2)");
  if (!(width > 0.0)) throw ContractViolation("vehicle width must be > 0");
  if (!(length > 0.0)) throw ContractViolation("vehicle length must be > 0");
}

void InflationConfig::validate() const {
  if (!(s_offset >= 0.0)) throw ContractViolation("inflation s_offset must be >= 0");
  if (!(l_offset >= 0.0)) throw ContractViolation("inflation l_offset must be >= 0");
}

double Rect::outside_distance(const FrenetPoint& q) const {
  const double ds = std::max(0.0, std::abs(q.x() - center.x()) - half_s);
  const double dl = std::max(0.0, std::abs(q.y() - center.y()) - half_l);
  return std::hypot(ds, dl);
}

void ObstaclePrediction::validate() const {
  if (frames.empty()) throw ContractViolation("obstacle '" + id + "' has no frames");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    if (!std::isfinite(f.t) || !f.center.allFinite())
      throw ContractViolation("obstacle '" + id + "' frame " + std::to_string(k) + " not finite");
    if (!(f.half_extent_s > 0.0) || !(f.half_extent_l > 0.0))
      throw ContractViolation("obstacle '" + id + "' frame " + std::to_string(k) +
                              " half extents must be > 0");
    if (k > 0 && !(f.t > frames[k - 1].t))
      throw ContractViolation("obstacle '" + id + "' frame timestamps must be strictly increasing");
  }
}

ObstaclePrediction inflate(ObstaclePrediction raw, const InflationConfig& inflation) {
  for (auto& f : raw.frames) {
    f.half_extent_s += inflation.s_offset;
    f.half_extent_l += inflation.l_offset;
  }
  return raw;
}

Rect occupancy_at(const ObstaclePrediction& obs, double t) {
  if (obs.frames.empty()) throw ContractViolation("obstacle '" + obs.id + "' has no frames");
  if (obs.is_static || obs.frames.size() == 1) {
    if (!obs.is_static && t != obs.frames.front().t)
      throw HorizonError("t outside prediction horizon of obstacle '" + obs.id + "'");
    return obs.frames.front().rect();
  }
  if (t < obs.first_time() || t > obs.last_time())
    throw HorizonError("t = " + std::to_string(t) + " outside prediction horizon of obstacle '" +
                       obs.id + "'");

  const auto it = std::upper_bound(obs.frames.begin(), obs.frames.end(), t,
                                   [](double v, const ObstacleFrame& f) { return v < f.t; });
  const auto& hi = (it == obs.frames.end()) ? obs.frames.back() : *it;
  const auto& lo = *std::prev(it);
  if (t == lo.t) return lo.rect();
  const double w = (t - lo.t) / (hi.t - lo.t);
  Rect r;
  r.center = (1.0 - w) * lo.center + w * hi.center;
  r.half_s = (1.0 - w) * lo.half_extent_s + w * hi.half_extent_s;
  r.half_l = (1.0 - w) * lo.half_extent_l + w * hi.half_extent_l;
  return r;
}

std::optional<Rect> occupancy_at(const ObstaclePrediction& obs, double t, HorizonPolicy policy) {
  if (obs.is_static) return obs.frames.front().rect();
  if (t < obs.first_time()) {
    if (policy == HorizonPolicy::kVanish) return std::nullopt;
    return obs.frames.front().rect();
  }
  if (t > obs.last_time()) {
    if (policy == HorizonPolicy::kVanish) return std::nullopt;
    return obs.frames.back().rect();
  }
  return occupancy_at(obs, t);
}

CollisionResult detect_collision(const UniformBSpline& traj,
                                 std::span<const ObstaclePrediction> obstacles, double dt,
                                 HorizonPolicy policy) {
  if (!(dt > 0.0)) throw ContractViolation("collision check step must be positive");
  CollisionResult out;
  if (obstacles.empty()) return out;
  const std::vector<double> times = sample_times(traj.t_start(), traj.t_end(), dt);
  const auto hit = kernels::first_collision_omp(traj, times, obstacles, policy);
  if (hit.sample_index < 0) return out;
  out.ttc = times[hit.sample_index] - traj.t_start();
  out.obstacle_index = hit.obstacle_index;
  out.obstacle_id = obstacles[hit.obstacle_index].id;
  return out;
}

namespace {

// Outward normals of the four faces: rear (-s), front (+s), right (-l), left (+l).
constexpr std::array<std::array<double, 2>, 4> kFaceNormals{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

double face_depth(const FrenetPoint& q, const Rect& r, int f) {
  switch (f) {
    case 0: return q.x() - (r.center.x() - r.half_s);
    case 1: return (r.center.x() + r.half_s) - q.x();
    case 2: return q.y() - (r.center.y() - r.half_l);
    default: return (r.center.y() + r.half_l) - q.y();
  }
}

FrenetPoint face_projection(const FrenetPoint& q, const Rect& r, int f) {
  const double s = std::clamp(q.x(), r.center.x() - r.half_s, r.center.x() + r.half_s);
  const double l = std::clamp(q.y(), r.center.y() - r.half_l, r.center.y() + r.half_l);
  switch (f) {
    case 0: return {r.center.x() - r.half_s, l};
    case 1: return {r.center.x() + r.half_s, l};
    case 2: return {s, r.center.y() - r.half_l};
    default: return {s, r.center.y() + r.half_l};
  }
}

AnchorPair face_anchor(const FrenetPoint& q, const Rect& r, int f) {
  AnchorPair a;
  a.p = face_projection(q, r, f);
  a.v = Vec2(kFaceNormals[f][0], kFaceNormals[f][1]);
  return a;
}

int nearest_face(const FrenetPoint& q, const Rect& r) {
  int best = 0;
  for (int f = 1; f < 4; ++f)
    if (face_depth(q, r, f) < face_depth(q, r, best)) best = f;
  return best;
}

}  // namespace

AnchorPair face_anchor(const FrenetPoint& q, const Rect& rect, Face face) {
  return face_anchor(q, rect, static_cast<int>(face));
}

double face_depth(const FrenetPoint& q, const Rect& rect, Face face) {
  return face_depth(q, rect, static_cast<int>(face));
}

std::optional<Face> face_of(const AnchorPair& pair) {
  for (int f = 0; f < 4; ++f)
    if (pair.v.x() == kFaceNormals[f][0] && pair.v.y() == kFaceNormals[f][1])
      return static_cast<Face>(f);
  return std::nullopt;
}

AnchorPair nearest_anchor(const FrenetPoint& q, const Rect& rect) {
  const FrenetPoint clamped(
      std::clamp(q.x(), rect.center.x() - rect.half_s, rect.center.x() + rect.half_s),
      std::clamp(q.y(), rect.center.y() - rect.half_l, rect.center.y() + rect.half_l));
  const Vec2 out = q - clamped;
  const double n = out.norm();
  if (n > 0.0) {
    AnchorPair a;
    a.p = clamped;
    a.v = out / n;
    return a;
  }
  return face_anchor(q, rect, nearest_face(q, rect));
}

std::vector<AnchorPair> anchor_pairs(std::span<const ControlRef> controls,
                                     std::span<const ObstaclePrediction> obstacles,
                                     double clearance, FaceSelection selection,
                                     HorizonPolicy policy) {
  std::vector<AnchorPair> out;
  for (int j = 0; j < static_cast<int>(obstacles.size()); ++j) {
    const auto& obs = obstacles[j];

    // Conflicting controls against obstacle j with their rectangles.
    struct Conflict {
      const ControlRef* ref;
      Rect rect;
    };
    std::vector<Conflict> conflicts;
    for (const auto& c : controls) {
      const auto rect = occupancy_at(obs, c.t, policy);
      if (!rect) continue;
      if (rect->contains(c.point) || rect->outside_distance(c.point) <= clearance)
        conflicts.push_back({&c, *rect});
    }
    if (conflicts.empty()) continue;

    auto emit = [&](const Conflict& c, AnchorPair a) {
      a.obstacle_index = j;
      a.obstacle_id = obs.id;
      a.control_index = c.ref->index;
      out.push_back(std::move(a));
    };

    if (selection == FaceSelection::kNearest) {
      for (const auto& c : conflicts) emit(c, nearest_anchor(c.ref->point, c.rect));
      continue;
    }

    std::size_t begin = 0;
    while (begin < conflicts.size()) {
      std::size_t end = begin + 1;
      while (end < conflicts.size() && conflicts[end].ref->index == conflicts[end - 1].ref->index + 1)
        ++end;
      std::array<double, 4> total{};
      for (std::size_t k = begin; k < end; ++k)
        for (int f = 0; f < 4; ++f) total[f] += face_depth(conflicts[k].ref->point, conflicts[k].rect, f);
      const int face = static_cast<int>(std::min_element(total.begin(), total.end()) - total.begin());
      for (std::size_t k = begin; k < end; ++k)
        emit(conflicts[k], face_anchor(conflicts[k].ref->point, conflicts[k].rect, face));
      begin = end;
    }
  }
  return out;
}

}  // namespace trajrepair
