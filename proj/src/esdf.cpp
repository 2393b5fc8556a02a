#include "gptraj/esdf.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gptraj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher 1D squared distance transform (lower envelope of
// parabolas). f holds squared distances on input, d the transformed output.
void transform_1d(const std::vector<double>& f, int n, std::vector<double>& d,
                  std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[0]] == kInf) {
      v[0] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    if (f[v[0]] == kInf) {
      d[q] = kInf;
      continue;
    }
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact squared euclidean distance (in cells) to the nearest seed cell.
std::vector<double> squared_distance_field(const LaneGrid& grid,
                                           bool seed_occupied) {
  const int ns = grid.ns;
  const int nd = grid.nd;
  std::vector<double> field(static_cast<std::size_t>(ns) * nd);
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nd; ++j) {
      const bool seed = grid.occupied(i, j) == seed_occupied;
      field[grid.index(i, j)] = seed ? 0.0 : kInf;
    }
  }

  const int nmax = std::max(ns, nd);
  std::vector<double> f(nmax), d(nmax), z(nmax + 1);
  std::vector<int> v(nmax);

  // Along d (contiguous rows).
  for (int i = 0; i < ns; ++i) {
    double* row = field.data() + grid.index(i, 0);
    std::copy(row, row + nd, f.begin());
    transform_1d(f, nd, d, v, z);
    std::copy(d.begin(), d.begin() + nd, row);
  }
  // Along s (columns).
  for (int j = 0; j < nd; ++j) {
    for (int i = 0; i < ns; ++i) f[i] = field[grid.index(i, j)];
    transform_1d(f, ns, d, v, z);
    for (int i = 0; i < ns; ++i) field[grid.index(i, j)] = d[i];
  }
  return field;
}

}  // namespace

LaneGrid::LaneGrid(double s_origin_, double s_extent_, double d_extent_,
                   double resolution_)
    : s_origin(s_origin_),
      s_extent(s_extent_),
      d_extent(d_extent_),
      resolution(resolution_) {
  if (s_extent <= 0.0 || d_extent <= 0.0 || resolution <= 0.0) {
    throw std::invalid_argument("LaneGrid: extents and resolution must be positive");
  }
  ns = static_cast<int>(std::ceil(s_extent / resolution - 1e-9));
  nd = static_cast<int>(std::ceil(d_extent / resolution - 1e-9));
  occupancy.assign(static_cast<std::size_t>(ns) * nd, 0);
}

void LaneGrid::rasterize_polygon(const std::vector<FrenetPoint>& polygon) {
  if (polygon.size() < 3) return;
  double s_lo = kInf, s_hi = -kInf, d_lo = kInf, d_hi = -kInf;
  for (const auto& p : polygon) {
    s_lo = std::min(s_lo, p.s);
    s_hi = std::max(s_hi, p.s);
    d_lo = std::min(d_lo, p.d);
    d_hi = std::max(d_hi, p.d);
  }
  const int i_lo = std::max(0, static_cast<int>((s_lo - s_origin) / resolution) - 1);
  const int i_hi = std::min(ns - 1, static_cast<int>((s_hi - s_origin) / resolution) + 1);
  const int j_lo = std::max(0, static_cast<int>((d_lo + 0.5 * d_extent) / resolution) - 1);
  const int j_hi = std::min(nd - 1, static_cast<int>((d_hi + 0.5 * d_extent) / resolution) + 1);

  const std::size_t n = polygon.size();
  for (int i = i_lo; i <= i_hi; ++i) {
    const double s = cell_s(i);
    for (int j = j_lo; j <= j_hi; ++j) {
      const double d = cell_d(j);
      // Even-odd rule.
      bool inside = false;
      for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
        const auto& pa = polygon[a];
        const auto& pb = polygon[b];
        if ((pa.d > d) != (pb.d > d)) {
          const double s_cross =
              pa.s + (d - pa.d) / (pb.d - pa.d) * (pb.s - pa.s);
          if (s < s_cross) inside = !inside;
        }
      }
      if (inside) set_occupied(i, j);
    }
  }
}

void LaneGrid::rasterize_boundaries(double corridor_half_width) {
  rasterize_outside(-corridor_half_width, corridor_half_width);
}

void LaneGrid::rasterize_outside(double d_min, double d_max) {
  for (int j = 0; j < nd; ++j) {
    const double d = cell_d(j);
    if (d > d_min && d < d_max) continue;
    for (int i = 0; i < ns; ++i) set_occupied(i, j);
  }
}

EsdfField EsdfField::build(const LaneGrid& grid) {
  EsdfField field;
  field.grid_ = grid;
  field.max_distance_ = std::hypot(grid.s_extent, grid.d_extent);
  field.distance_.resize(grid.occupancy.size());

  const std::vector<double> to_occupied = squared_distance_field(grid, true);
  const std::vector<double> to_free = squared_distance_field(grid, false);

  for (std::size_t idx = 0; idx < field.distance_.size(); ++idx) {
    const bool occ = grid.occupancy[idx] != 0;
    const double sq = occ ? to_free[idx] : to_occupied[idx];
    double dist = (sq == kInf) ? field.max_distance_
                               : std::min(grid.resolution * std::sqrt(sq),
                                          field.max_distance_);
    field.distance_[idx] = occ ? -dist : dist;
  }
  return field;
}

EsdfQuery EsdfField::query(const FrenetPoint& p) const {
  EsdfQuery out;
  const double res = grid_.resolution;
  double u = (p.s - grid_.s_origin) / res - 0.5;
  double w = (p.d + 0.5 * grid_.d_extent) / res - 0.5;

  const double u_max = static_cast<double>(grid_.ns - 1);
  const double w_max = static_cast<double>(grid_.nd - 1);
  if (u < 0.0 || u > u_max || w < 0.0 || w > w_max) {
    out.out_of_bounds = true;
    u = std::clamp(u, 0.0, u_max);
    w = std::clamp(w, 0.0, w_max);
  }

  int i0 = std::min(static_cast<int>(u), grid_.ns - 2);
  int j0 = std::min(static_cast<int>(w), grid_.nd - 2);
  i0 = std::max(i0, 0);
  j0 = std::max(j0, 0);
  const double fu = u - i0;
  const double fv = w - j0;

  const double d00 = cell_distance(i0, j0);
  const double d10 = cell_distance(i0 + 1, j0);
  const double d01 = cell_distance(i0, j0 + 1);
  const double d11 = cell_distance(i0 + 1, j0 + 1);

  out.distance = (1.0 - fu) * (1.0 - fv) * d00 + fu * (1.0 - fv) * d10 +
                 (1.0 - fu) * fv * d01 + fu * fv * d11;
  if (!out.out_of_bounds) {
    out.gradient[0] = ((1.0 - fv) * (d10 - d00) + fv * (d11 - d01)) / res;
    out.gradient[1] = ((1.0 - fu) * (d01 - d00) + fu * (d11 - d10)) / res;
  }
  return out;
}

void EsdfField::write_pgm(const std::string& path) const {
  double lo = kInf, hi = -kInf;
  for (double d : distance_) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (hi <= lo) hi = lo + 1.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << grid_.ns << " " << grid_.nd << "\n255\n";
  // Image rows scan d from the left edge (top) to the right edge.
  for (int j = grid_.nd - 1; j >= 0; --j) {
    for (int i = 0; i < grid_.ns; ++i) {
      const double d = cell_distance(i, j);
      const int g = static_cast<int>(std::lround(255.0 * (d - lo) / (hi - lo)));
      out.put(static_cast<char>(std::clamp(g, 0, 255)));
    }
  }
}

}  // namespace gptraj
