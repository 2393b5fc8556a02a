#pragma once

#include <Eigen/Core>

namespace gptraj {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Lateral state of the path at one longitudinal station:
/// offset d, slope d' = dd/ds and curvature-like d'' = d²d/ds².
struct LateralState {
  double d = 0.0;
  double d_prime = 0.0;
  double d_pprime = 0.0;

  LateralState() = default;
  LateralState(double d_, double dp_, double dpp_)
      : d(d_), d_prime(dp_), d_pprime(dpp_) {}
  explicit LateralState(const Vec3& v) : d(v[0]), d_prime(v[1]), d_pprime(v[2]) {}

  Vec3 vec() const { return Vec3(d, d_prime, d_pprime); }
  bool finite() const {
    return std::isfinite(d) && std::isfinite(d_prime) && std::isfinite(d_pprime);
  }
};

/// Point in the curvilinear frame of a reference line. d > 0 is left of the line.
struct FrenetPoint {
  double s = 0.0;
  double d = 0.0;
};

struct CartesianPose {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
};

}  // namespace gptraj
