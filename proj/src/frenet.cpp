#include "gptraj/frenet.h"

#include <cmath>
#include <stdexcept>

namespace gptraj {

namespace {
constexpr double kSingularityGuard = 1e-9;
}

VehicleShape VehicleShape::from_footprint(double length, double width,
                                          int n_circles, double safety_margin,
                                          double ref_offset) {
  if (length <= 0.0 || width <= 0.0 || n_circles < 1) {
    throw std::invalid_argument("invalid vehicle footprint");
  }
  VehicleShape shape;
  const double seg = length / static_cast<double>(n_circles);
  shape.radius = 0.5 * std::hypot(seg, width);
  shape.safety_margin = safety_margin;
  shape.circle_offsets.resize(n_circles);
  for (int i = 0; i < n_circles; ++i) {
    shape.circle_offsets[i] =
        ref_offset - 0.5 * length + (0.5 + i) * seg;
  }
  return shape;
}

double heading_offset(double d, double d_prime, double kappa_r) {
  const double w = 1.0 - kappa_r * d;
  if (w <= kSingularityGuard) {
    throw std::domain_error("heading_offset: at or beyond curvature center");
  }
  return std::atan2(d_prime, w);
}

void heading_offset_partials(double d, double d_prime, double kappa_r,
                             double* dtheta_dd, double* dtheta_ddp) {
  const double w = 1.0 - kappa_r * d;
  const double u = d_prime;
  const double denom = u * u + w * w;
  *dtheta_dd = kappa_r * u / denom;
  *dtheta_ddp = w / denom;
}

double path_curvature(const LateralState& state, double kappa_r,
                      double dkappa_r) {
  const double w = 1.0 - kappa_r * state.d;
  if (w <= kSingularityGuard) {
    throw std::domain_error("path_curvature: at or beyond curvature center");
  }
  const double theta = std::atan2(state.d_prime, w);
  const double cos_t = std::cos(theta);
  const double tan_t = state.d_prime / w;
  const double a = state.d_pprime -
                   (dkappa_r * state.d + kappa_r * state.d_prime) * tan_t;
  return a * cos_t * cos_t * cos_t / (w * w) + kappa_r * cos_t / w;
}

Vec3 path_curvature_partials(const LateralState& state, double kappa_r,
                             double dkappa_r) {
  const double w = 1.0 - kappa_r * state.d;
  const double u = state.d_prime;
  const double theta = std::atan2(u, w);
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double tan_t = u / w;
  const double sec2 = 1.0 / (cos_t * cos_t);
  const double denom = u * u + w * w;
  const double dth_dd = kappa_r * u / denom;
  const double dth_du = w / denom;

  const double g = dkappa_r * state.d + kappa_r * u;
  const double a = state.d_pprime - g * tan_t;
  const double b = cos_t * cos_t * cos_t / (w * w);
  const double c3 = cos_t * cos_t;  // cos^2

  const double da_dd = -dkappa_r * tan_t - g * sec2 * dth_dd;
  const double da_du = -kappa_r * tan_t - g * sec2 * dth_du;

  const double db_dtheta = -3.0 * c3 * sin_t / (w * w);
  const double db_dw = -2.0 * cos_t * cos_t * cos_t / (w * w * w);
  const double db_dd = db_dtheta * dth_dd + db_dw * (-kappa_r);
  const double db_du = db_dtheta * dth_du;

  const double dc_dtheta = -kappa_r * sin_t / w;
  const double dc_dw = -kappa_r * cos_t / (w * w);
  const double dc_dd = dc_dtheta * dth_dd + dc_dw * (-kappa_r);
  const double dc_du = dc_dtheta * dth_du;

  Vec3 out;
  out[0] = da_dd * b + a * db_dd + dc_dd;
  out[1] = da_du * b + a * db_du + dc_du;
  out[2] = b;
  return out;
}

std::vector<FrenetPoint> circle_centers(const FrenetPoint& p, double theta,
                                        const VehicleShape& shape) {
  std::vector<FrenetPoint> centers;
  centers.reserve(shape.circle_offsets.size());
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  for (double l : shape.circle_offsets) {
    centers.push_back({p.s + l * cos_t, p.d + l * sin_t});
  }
  return centers;
}

Eigen::Matrix2d circle_center_jacobian(double theta, double l, double d,
                                       double d_prime, double kappa_r) {
  double dth_dd = 0.0;
  double dth_ddp = 0.0;
  heading_offset_partials(d, d_prime, kappa_r, &dth_dd, &dth_ddp);
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  Eigen::Matrix2d j;
  j(0, 0) = -l * sin_t * dth_dd;
  j(0, 1) = -l * sin_t * dth_ddp;
  j(1, 0) = 1.0 + l * cos_t * dth_dd;
  j(1, 1) = l * cos_t * dth_ddp;
  return j;
}

CartesianPose frenet_to_cartesian(const ReferenceLine& ref,
                                  const FrenetPoint& p, double d_prime) {
  if (p.s < -1e-9 || p.s > ref.length() + 1e-9) {
    throw std::domain_error("frenet_to_cartesian: s outside reference line");
  }
  CartesianPose pose;
  pose.position = ref.point_at(p.s) + p.d * ref.normal_at(p.s);
  const double theta = heading_offset(p.d, d_prime, ref.kappa_at(p.s));
  pose.heading = ref.heading_at(p.s) + theta;
  return pose;
}

FrenetProjection cartesian_to_frenet(const ReferenceLine& ref, const Vec2& p,
                                     double max_lateral) {
  // Coarse scan, then Newton on g(s) = (p - r(s)) . t(s) = 0.
  const std::size_t idx = ref.nearest_index(p);
  double s = ref.arclength()[idx];
  for (int iter = 0; iter < 30; ++iter) {
    const Vec2 r = ref.point_at(s);
    const Vec2 t = ref.tangent_at(s);
    const Vec2 n = ref.normal_at(s);
    const double g = (p - r).dot(t);
    const double dg = -1.0 + ref.kappa_at(s) * (p - r).dot(n);
    if (std::abs(dg) < 1e-9) {
      throw std::domain_error("cartesian_to_frenet: ambiguous projection");
    }
    const double step = -g / dg;
    s = std::clamp(s + step, 0.0, ref.length());
    if (std::abs(step) < 1e-12) break;
  }
  const Vec2 r = ref.point_at(s);
  const double d = (p - r).dot(ref.normal_at(s));
  if (std::abs(d) > max_lateral) {
    throw std::domain_error("cartesian_to_frenet: outside lateral corridor");
  }
  if (1.0 - ref.kappa_at(s) * d <= kSingularityGuard) {
    throw std::domain_error("cartesian_to_frenet: ambiguous projection");
  }
  return {{s, d}, ref.heading_at(s)};
}

}  // namespace gptraj
