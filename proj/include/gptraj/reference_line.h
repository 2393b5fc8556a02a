#pragma once

#include <vector>

#include "gptraj/types.h"

namespace gptraj {

/// Arc-length parameterized center line. Built from a raw waypoint polyline,
/// resampled at a uniform step; heading and curvature come from central
/// differences smoothed with a short moving average, so the line is usable
/// even when the input waypoints are sparse or slightly noisy.
///
/// Immutable after construction; all queries are const and thread-safe.
class ReferenceLine {
 public:
  static constexpr double kResampleStep = 0.5;  // m

  ReferenceLine() = default;
  explicit ReferenceLine(const std::vector<Vec2>& waypoints,
                         double step = kResampleStep);

  double length() const { return arclength_.empty() ? 0.0 : arclength_.back(); }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& arclength() const { return arclength_; }
  const std::vector<double>& heading() const { return heading_; }
  const std::vector<double>& kappa() const { return kappa_; }
  const std::vector<double>& dkappa() const { return dkappa_; }

  // Linear interpolation in s between resampled stations. s is clamped to
  // [0, length()].
  Vec2 point_at(double s) const;
  double heading_at(double s) const;
  double kappa_at(double s) const;
  double dkappa_at(double s) const;

  Vec2 tangent_at(double s) const;
  // Left unit normal (rotate tangent by +90 deg).
  Vec2 normal_at(double s) const;

  // Index of the resampled station nearest to a cartesian point.
  std::size_t nearest_index(const Vec2& p) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> arclength_;
  std::vector<double> heading_;
  std::vector<double> kappa_;
  std::vector<double> dkappa_;
  double step_ = kResampleStep;

  // Bracketing index + interpolation fraction for a clamped s.
  std::pair<std::size_t, double> locate(double s) const;
};

}  // namespace gptraj
