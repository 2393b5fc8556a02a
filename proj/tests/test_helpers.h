#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gptraj/reference_line.h"
#include "gptraj/types.h"

namespace gptraj::test {

// Platform-stable uniform doubles (std distributions are not portable).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline std::vector<Vec2> straight_waypoints(double length, double step = 1.0) {
  std::vector<Vec2> wps;
  for (double x = 0.0; x <= length + 1e-9; x += step) wps.emplace_back(x, 0.0);
  return wps;
}

// Constant-curvature curve starting at the origin with heading 0; kappa > 0
// bends left. Exact closed forms, independent of ReferenceLine resampling.
struct ArcCurve {
  double kappa = 0.0;

  Vec2 point(double s) const {
    if (std::abs(kappa) < 1e-12) return Vec2(s, 0.0);
    return Vec2(std::sin(kappa * s) / kappa,
                (1.0 - std::cos(kappa * s)) / kappa);
  }
  double heading(double s) const { return kappa * s; }
  Vec2 normal(double s) const {
    const double h = heading(s);
    return Vec2(-std::sin(h), std::cos(h));
  }
};

inline std::vector<Vec2> arc_waypoints(double kappa, double arc_length,
                                       double step = 0.5) {
  ArcCurve arc{kappa};
  std::vector<Vec2> wps;
  for (double s = 0.0; s <= arc_length + 1e-9; s += step) {
    wps.push_back(arc.point(s));
  }
  return wps;
}

// Curve with linearly varying curvature kappa(s) = kappa0 + c * s, heading
// psi(s) = kappa0 s + c s^2 / 2; positions by Simpson quadrature, accurate to
// well below FD-oracle noise.
struct ClothoidCurve {
  double kappa0 = 0.0;
  double c = 0.0;

  double heading(double s) const { return kappa0 * s + 0.5 * c * s * s; }
  double kappa(double s) const { return kappa0 + c * s; }
  Vec2 point(double s) const {
    const int n = 400;  // Simpson panels
    const double h = s / (2 * n);
    Vec2 acc(0.0, 0.0);
    for (int i = 0; i <= 2 * n; ++i) {
      const double si = i * h;
      const double w = (i == 0 || i == 2 * n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      const double psi = heading(si);
      acc += w * Vec2(std::cos(psi), std::sin(psi));
    }
    return acc * (h / 3.0);
  }
  Vec2 normal(double s) const {
    const double h = heading(s);
    return Vec2(-std::sin(h), std::cos(h));
  }
};

}  // namespace gptraj::test
