#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace trajrepair {

using Vec2 = Eigen::Vector2d;

// Point in the road-aligned frame: x() is the arc position s, y() the
// lateral offset l. Both in metres.
using FrenetPoint = Vec2;

struct TimedPoint {
  double t = 0.0;
  FrenetPoint position = FrenetPoint::Zero();
};

struct TrajectorySample {
  double t = 0.0;
  FrenetPoint position = FrenetPoint::Zero();
  Vec2 velocity = Vec2::Zero();
  Vec2 acceleration = Vec2::Zero();
  Vec2 jerk = Vec2::Zero();
};

// Nonzero basis functions on one knot span: weights[r] multiplies control
// point first_control + r.
struct ActiveBasis {
  int first_control = 0;
  std::vector<double> weights;
};

/// Uniform (unclamped) B-spline over 2-D Frenet points.
///
/// Knot m sits at t_start + (m - degree) * knot_interval, so the usable
/// domain [t_start, t_start + (N - degree) * knot_interval] starts at knot
/// index `degree`. Spans are half-open; the domain end evaluates on the
/// closure of the last span.
class UniformBSpline {
 public:
  UniformBSpline(int degree, std::vector<FrenetPoint> control_points,
                 double knot_interval, double t_start = 0.0);

  int degree() const noexcept { return degree_; }
  double knot_interval() const noexcept { return knot_interval_; }
  double t_start() const noexcept { return t_start_; }
  double t_end() const noexcept { return t_start_ + duration(); }
  double duration() const noexcept { return num_segments() * knot_interval_; }
  int num_controls() const noexcept { return static_cast<int>(controls_.size()); }
  int num_segments() const noexcept { return num_controls() - degree_; }
  std::span<const FrenetPoint> control_points() const noexcept { return controls_; }
  const FrenetPoint& control_point(int i) const { return controls_.at(i); }

  bool in_domain(double t, double tol = 1e-12) const noexcept {
    return t >= t_start_ - tol && t <= t_end() + tol;
  }

  // Full knot vector, length N + degree + 1.
  std::vector<double> knots() const;

  // Span index k in [0, num_segments) holding t; throws DomainError.
  int segment_index(double t) const;

  ActiveBasis active_basis(double t) const;

  FrenetPoint evaluate(double t) const;

  // Value of the order-th derivative; zero when order > degree.
  Vec2 evaluate_derivative(double t, int order) const;

  // Spline of degree - order whose control points are the repeated finite
  // differences of this one divided by the knot interval. Same domain.
  UniformBSpline derivative(int order = 1) const;

  // Time associated with control point i (its Greville abscissa), clamped to
  // the usable domain.
  double control_time(int i) const noexcept;

  UniformBSpline with_control_points(std::vector<FrenetPoint> control_points) const {
    return UniformBSpline(degree_, std::move(control_points), knot_interval_, t_start_);
  }

 private:
  int degree_;
  std::vector<FrenetPoint> controls_;
  double knot_interval_;
  double t_start_;
};

// Cox-de Boor recursion for B_{i,p}(t) on an arbitrary nondecreasing knot
// vector. 0/0 terms evaluate to 0.
double basis(int i, int p, double t, std::span<const double> knots);

// (points[i+1] - points[i]) / dt for every i.
std::vector<FrenetPoint> difference(std::span<const FrenetPoint> points, double dt);

// Adjoint of `difference`: maps a gradient on the differenced points back
// onto the (one longer) original points.
std::vector<Vec2> difference_adjoint(std::span<const Vec2> grads, double dt);

// Position and derivatives at t_start, t_start + dt, ..., plus the domain end.
std::vector<TrajectorySample> sample(const UniformBSpline& spline, double dt);

// Sample times used by `sample`.
std::vector<double> sample_times(double t_begin, double t_end, double dt);

struct FitResult {
  UniformBSpline spline;
  double rms_residual = 0.0;
};

// Least-squares control points for a uniform spline whose domain starts at
// the first timestamp and covers the last one.
FitResult fit_through(std::span<const TimedPoint> points, int degree, double knot_interval);

}  // namespace trajrepair
