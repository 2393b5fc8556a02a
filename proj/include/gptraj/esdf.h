#pragma once

#include <string>
#include <vector>

#include "gptraj/types.h"

namespace gptraj {

/// Discretized frenet-frame band around the reference line. Cell (i, j) is
/// centered at s = s_origin + (i + 0.5) * resolution,
/// d = -d_extent/2 + (j + 0.5) * resolution.
struct LaneGrid {
  double s_origin = 0.0;
  double s_extent = 100.0;
  double d_extent = 8.0;
  double resolution = 0.1;
  std::vector<uint8_t> occupancy;  // row-major: index = i * nd + j

  LaneGrid() = default;
  LaneGrid(double s_origin_, double s_extent_, double d_extent_,
           double resolution_);

  int ns = 0;
  int nd = 0;

  int index(int i, int j) const { return i * nd + j; }
  double cell_s(int i) const { return s_origin + (i + 0.5) * resolution; }
  double cell_d(int j) const { return -0.5 * d_extent + (j + 0.5) * resolution; }
  bool occupied(int i, int j) const { return occupancy[index(i, j)] != 0; }
  void set_occupied(int i, int j) { occupancy[index(i, j)] = 1; }

  /// Marks cells whose center lies inside the polygon (frenet coordinates,
  /// ordered vertices, convexity not required).
  void rasterize_polygon(const std::vector<FrenetPoint>& polygon);

  /// Marks the strips |d| >= corridor_half_width as occupied, so lane
  /// boundaries and static obstacles share one distance field.
  void rasterize_boundaries(double corridor_half_width);

  /// Asymmetric variant: occupies cells with d outside (d_min, d_max).
  void rasterize_outside(double d_min, double d_max);
};

struct EsdfQuery {
  double distance = 0.0;
  Vec2 gradient{0.0, 0.0};  // (d/ds, d/dd)
  bool out_of_bounds = false;
};

/// Signed euclidean distance per cell: positive outside occupied space
/// (distance to the nearest occupied cell), negative inside (distance to the
/// nearest free cell). Distances are exact between cell centers, clamped at
/// the grid diagonal.
class EsdfField {
 public:
  EsdfField() = default;

  /// Two-pass exact squared-distance transform in each direction, then signed.
  static EsdfField build(const LaneGrid& grid);

  /// Bilinear interpolation between cell centers with the analytic gradient
  /// of the patch. Out-of-bounds points are clamped onto the grid with a
  /// zero gradient and the flag set.
  EsdfQuery query(const FrenetPoint& p) const;

  double cell_distance(int i, int j) const { return distance_[grid_.index(i, j)]; }
  const LaneGrid& grid() const { return grid_; }
  double max_distance() const { return max_distance_; }

  /// Portable grayscale dump for debugging; 0 at the most negative distance,
  /// 255 at the most positive.
  void write_pgm(const std::string& path) const;

 private:
  LaneGrid grid_;
  std::vector<double> distance_;
  double max_distance_ = 0.0;
};

}  // namespace gptraj
