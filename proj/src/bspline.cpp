#include "trajrepair/bspline.hpp"

#include "trajrepair/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace trajrepair {

namespace {

double domain_tolerance(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

}  // namespace

UniformBSpline::UniformBSpline(int degree, std::vector<FrenetPoint> control_points,
                               double knot_interval, double t_start)
    : degree_(degree),
      controls_(std::move(control_points)),
      knot_interval_(knot_interval),
      t_start_(t_start) {
  if (degree_ < 0) throw ContractViolation("spline degree must be nonnegative");
  if (!(knot_interval_ > 0.0) || !std::isfinite(knot_interval_))
    throw ContractViolation("knot interval must be positive and finite");
  if (!std::isfinite(t_start_)) throw ContractViolation("t_start must be finite");
  if (static_cast<int>(controls_.size()) < degree_ + 1)
    throw ContractViolation("a degree-" + std::to_string(degree_) + " spline needs at least " +
                            std::to_string(degree_ + 1) + " control points, got " +
                            std::to_string(controls_.size()));
  for (const auto& q : controls_) {
    if (!q.allFinite()) throw ContractViolation("control point is not finite");
  }
}

std::vector<double> UniformBSpline::knots() const {
  const int m = num_controls() + degree_ + 1;
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) out[i] = t_start_ + (i - degree_) * knot_interval_;
  return out;
}

int UniformBSpline::segment_index(double t) const {
  if (!in_domain(t, domain_tolerance(t))) {
    throw DomainError("t = " + std::to_string(t) + " outside spline domain [" +
                      std::to_string(t_start_) + ", " + std::to_string(t_end()) + "]");
  }
  const int k = static_cast<int>(std::floor((t - t_start_) / knot_interval_));
  return std::clamp(k, 0, num_segments() - 1);
}

ActiveBasis UniformBSpline::active_basis(double t) const {
  const int k = segment_index(t);
  const int p = degree_;
  const int mu = k + p;
  auto knot = [&](int m) { return t_start_ + (m - p) * knot_interval_; };

  ActiveBasis out;
  out.first_control = k;
  out.weights.assign(p + 1, 0.0);
  out.weights[0] = 1.0;
  std::vector<double> left(p + 1, 0.0), right(p + 1, 0.0);
  for (int j = 1; j <= p; ++j) {
    left[j] = t - knot(mu + 1 - j);
    right[j] = knot(mu + j) - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out.weights[r] / (right[r + 1] + left[j - r]);
      out.weights[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out.weights[j] = saved;
  }
  return out;
}

FrenetPoint UniformBSpline::evaluate(double t) const {
  const ActiveBasis b = active_basis(t);
  FrenetPoint out = FrenetPoint::Zero();
  for (int r = 0; r <= degree_; ++r) out += b.weights[r] * controls_[b.first_control + r];
  return out;
}

Vec2 UniformBSpline::evaluate_derivative(double t, int order) const {
  if (order < 0) throw ContractViolation("derivative order must be nonnegative");
  if (order == 0) return evaluate(t);
  if (order > degree_) {
    segment_index(t);  // domain check only
    return Vec2::Zero();
  }
  return derivative(order).evaluate(t);
}

UniformBSpline UniformBSpline::derivative(int order) const {
  if (order < 0 || order > degree_)
    throw ContractViolation("derivative order " + std::to_string(order) +
                            " exceeds spline degree " + std::to_string(degree_));
  std::vector<FrenetPoint> pts = controls_;
  for (int o = 0; o < order; ++o) pts = difference(pts, knot_interval_);
  return UniformBSpline(degree_ - order, std::move(pts), knot_interval_, t_start_);
}

double UniformBSpline::control_time(int i) const noexcept {
  const double t = t_start_ + (i - 0.5 * (degree_ - 1)) * knot_interval_;
  return std::clamp(t, t_start_, t_end());
}

double basis(int i, int p, double t, std::span<const double> knots) {
  const int m = static_cast<int>(knots.size());
  if (p < 0 || i < 0 || i > m - p - 2)
    throw ContractViolation("basis index " + std::to_string(i) + " out of range for degree " +
                            std::to_string(p) + " and " + std::to_string(m) + " knots");
  if (p == 0) return (knots[i] <= t && t < knots[i + 1]) ? 1.0 : 0.0;

  double out = 0.0;
  const double left_den = knots[i + p] - knots[i];
  if (left_den != 0.0) out += (t - knots[i]) / left_den * basis(i, p - 1, t, knots);
  const double right_den = knots[i + p + 1] - knots[i + 1];
  if (right_den != 0.0) out += (knots[i + p + 1] - t) / right_den * basis(i + 1, p - 1, t, knots);
  return out;
}

std::vector<FrenetPoint> difference(std::span<const FrenetPoint> points, double dt) {
  std::vector<FrenetPoint> out;
  if (points.size() < 2) return out;
  out.reserve(points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) out.emplace_back((points[i + 1] - points[i]) / dt);
  return out;
}

std::vector<Vec2> difference_adjoint(std::span<const Vec2> grads, double dt) {
  std::vector<Vec2> out(grads.size() + 1, Vec2::Zero());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    out[i + 1] += grads[i] / dt;
    out[i] -= grads[i] / dt;
  }
  return out;
}

std::vector<double> sample_times(double t_begin, double t_end, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("sampling step must be positive");
  const double span = t_end - t_begin;
  const double eps = 1e-9 * std::max(1.0, std::abs(span));
  const auto steps = static_cast<long>(std::floor(span / dt + 1e-9));
  std::vector<double> ts;
  ts.reserve(steps + 2);
  for (long k = 0; k <= steps; ++k) ts.push_back(t_begin + k * dt);
  if (ts.empty() || ts.back() < t_end - eps) ts.push_back(t_end);
  else ts.back() = std::min(ts.back(), t_end);
  return ts;
}

std::vector<TrajectorySample> sample(const UniformBSpline& spline, double dt) {
  const std::vector<double> ts = sample_times(spline.t_start(), spline.t_end(), dt);
  const int p = spline.degree();
  const UniformBSpline vel = p >= 1 ? spline.derivative(1) : spline;
  const UniformBSpline acc = p >= 2 ? spline.derivative(2) : spline;
  const UniformBSpline jerk = p >= 3 ? spline.derivative(3) : spline;

  std::vector<TrajectorySample> out(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    auto& s = out[k];
    s.t = ts[k];
    s.position = spline.evaluate(ts[k]);
    if (p >= 1) s.velocity = vel.evaluate(ts[k]);
    if (p >= 2) s.acceleration = acc.evaluate(ts[k]);
    if (p >= 3) s.jerk = jerk.evaluate(ts[k]);
  }
  return out;
}

FitResult fit_through(std::span<const TimedPoint> points, int degree, double knot_interval) {
  if (degree < 0) throw ContractViolation("spline degree must be nonnegative");
  if (!(knot_interval > 0.0)) throw ContractViolation("knot interval must be positive");
  if (static_cast<int>(points.size()) < degree + 1)
    throw FitError("need at least " + std::to_string(degree + 1) + " points, got " +
                   std::to_string(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].t) || !points[i].position.allFinite())
      throw FitError("point " + std::to_string(i) + " is not finite");
    if (i > 0 && !(points[i].t > points[i - 1].t))
      throw FitError("timestamps must be strictly increasing (index " + std::to_string(i) + ")");
  }

  const double t0 = points.front().t;
  const double span = points.back().t - t0;
  const int segments = std::max(1, static_cast<int>(std::ceil(span / knot_interval - 1e-9)));
  const int n_controls = segments + degree;
  const int n_points = static_cast<int>(points.size());
  if (n_points < n_controls)
    throw FitError("underdetermined fit: " + std::to_string(n_points) + " points for " +
                   std::to_string(n_controls) + " control points");

  // Geometry-free probe spline gives the basis rows.
  const UniformBSpline probe(degree, std::vector<FrenetPoint>(n_controls, FrenetPoint::Zero()),
                             knot_interval, t0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_points, n_controls);
  Eigen::MatrixXd b(n_points, 2);
  for (int r = 0; r < n_points; ++r) {
    const ActiveBasis basis_row = probe.active_basis(points[r].t);
    for (int j = 0; j <= degree; ++j) a(r, basis_row.first_control + j) = basis_row.weights[j];
    b.row(r) = points[r].position.transpose();
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < n_controls)
    throw FitError("rank-deficient fit: timestamps do not constrain every control point");
  const Eigen::MatrixXd x = qr.solve(b);
  const double rms = std::sqrt((a * x - b).rowwise().squaredNorm().mean());

  std::vector<FrenetPoint> controls(n_controls);
  for (int i = 0; i < n_controls; ++i) controls[i] = x.row(i).transpose();
  return FitResult{UniformBSpline(degree, std::move(controls), knot_interval, t0), rms};
}

}  // namespace trajrepair
