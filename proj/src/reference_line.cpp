#include "gptraj/reference_line.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gptraj {

namespace {

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

// 5-tap moving average with shrinking window at the ends.
std::vector<double> smooth5(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - 2);
    int hi = std::min(n - 1, i + 2);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += v[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace

ReferenceLine::ReferenceLine(const std::vector<Vec2>& waypoints, double step)
    : step_(step) {
  if (waypoints.size() < 2) {
    throw std::invalid_argument("reference line needs at least 2 waypoints");
  }
  if (step <= 0.0) {
    throw std::invalid_argument("resample step must be positive");
  }

  // Cumulative arc length of the raw polyline.
  std::vector<double> raw_s(waypoints.size(), 0.0);
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    raw_s[i] = raw_s[i - 1] + (waypoints[i] - waypoints[i - 1]).norm();
  }
  const double total = raw_s.back();
  if (total <= step) {
    throw std::invalid_argument("reference line shorter than resample step");
  }

  // Uniform resampling along the polyline.
  const std::size_t n = static_cast<std::size_t>(std::floor(total / step)) + 1;
  points_.reserve(n);
  arclength_.reserve(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::min(static_cast<double>(i) * step, total);
    while (seg + 2 < waypoints.size() && raw_s[seg + 1] < s) ++seg;
    const double ds = raw_s[seg + 1] - raw_s[seg];
    const double t = ds > 1e-12 ? (s - raw_s[seg]) / ds : 0.0;
    points_.push_back(waypoints[seg] + t * (waypoints[seg + 1] - waypoints[seg]));
    arclength_.push_back(s);
  }

  // Heading from central differences of position.
  const std::size_t m = points_.size();
  heading_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = (i == 0) ? 0 : i - 1;
    const std::size_t b = (i + 1 == m) ? m - 1 : i + 1;
    const Vec2 diff = points_[b] - points_[a];
    heading_[i] = std::atan2(diff.y(), diff.x());
  }

  // Curvature = d(heading)/ds, unwrapped, then smoothed; same again for dkappa.
  std::vector<double> kraw(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = (i == 0) ? 0 : i - 1;
    const std::size_t b = (i + 1 == m) ? m - 1 : i + 1;
    const double ds = arclength_[b] - arclength_[a];
    kraw[i] = ds > 1e-12 ? wrap_angle(heading_[b] - heading_[a]) / ds : 0.0;
  }
  kappa_ = smooth5(kraw);

  std::vector<double> dkraw(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t a = (i == 0) ? 0 : i - 1;
    const std::size_t b = (i + 1 == m) ? m - 1 : i + 1;
    const double ds = arclength_[b] - arclength_[a];
    dkraw[i] = ds > 1e-12 ? (kappa_[b] - kappa_[a]) / ds : 0.0;
  }
  dkappa_ = smooth5(dkraw);
}

std::pair<std::size_t, double> ReferenceLine::locate(double s) const {
  const double sc = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(arclength_.begin(), arclength_.end(), sc);
  std::size_t i = (it == arclength_.begin())
                      ? 0
                      : static_cast<std::size_t>(it - arclength_.begin()) - 1;
  if (i + 1 >= arclength_.size()) i = arclength_.size() - 2;
  const double ds = arclength_[i + 1] - arclength_[i];
  const double t = ds > 1e-12 ? (sc - arclength_[i]) / ds : 0.0;
  return {i, t};
}

Vec2 ReferenceLine::point_at(double s) const {
  // Cubic Hermite patch with tangents from the stored headings; keeps the
  // interpolated curve consistent with heading_at to well below resample
  // error.
  auto [i, t] = locate(s);
  const double len = arclength_[i + 1] - arclength_[i];
  const Vec2 t0(std::cos(heading_[i]), std::sin(heading_[i]));
  const Vec2 t1(std::cos(heading_[i + 1]), std::sin(heading_[i + 1]));
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * points_[i] + h10 * len * t0 + h01 * points_[i + 1] +
         h11 * len * t1;
}

double ReferenceLine::heading_at(double s) const {
  auto [i, t] = locate(s);
  return heading_[i] + t * wrap_angle(heading_[i + 1] - heading_[i]);
}

double ReferenceLine::kappa_at(double s) const {
  auto [i, t] = locate(s);
  return kappa_[i] + t * (kappa_[i + 1] - kappa_[i]);
}

double ReferenceLine::dkappa_at(double s) const {
  auto [i, t] = locate(s);
  return dkappa_[i] + t * (dkappa_[i + 1] - dkappa_[i]);
}

Vec2 ReferenceLine::tangent_at(double s) const {
  const double h = heading_at(s);
  return Vec2(std::cos(h), std::sin(h));
}

Vec2 ReferenceLine::normal_at(double s) const {
  const double h = heading_at(s);
  return Vec2(-std::sin(h), std::cos(h));
}

std::size_t ReferenceLine::nearest_index(const Vec2& p) const {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d2 = (points_[i] - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace gptraj
