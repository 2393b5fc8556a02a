#pragma once

#include <vector>

#include "gptraj/reference_line.h"
#include "gptraj/types.h"

namespace gptraj {

/// Bounding-circle decomposition of the vehicle footprint. Circle centers sit
/// on the vehicle's longitudinal axis at signed offsets from the path point V;
/// the sign already encodes front (+) vs rear (-), so the center formula is
/// branch-free.
struct VehicleShape {
  std::vector<double> circle_offsets;  // signed l_i, meters along heading
  double radius = 1.0;                 // R_c
  double safety_margin = 0.1;          // epsilon_s

  // Covers a length x width box centered on the reference point V with
  // n_circles equal circles. ref_offset shifts V away from the geometric
  // center (e.g. rear-axle reference), measured forward positive.
  static VehicleShape from_footprint(double length, double width,
                                     int n_circles, double safety_margin,
                                     double ref_offset = 0.0);

  double clearance_required() const { return radius + safety_margin; }
};

/// Heading offset theta between path tangent and reference tangent, from
/// d' = (1 - kappa_r * d) * tan(theta). Throws std::domain_error at or past
/// the curvature center (1 - kappa_r * d <= 0).
double heading_offset(double d, double d_prime, double kappa_r);

// d(theta)/d(d) and d(theta)/d(d') at the same point; used to chain factor
// jacobians through circle placement.
void heading_offset_partials(double d, double d_prime, double kappa_r,
                             double* dtheta_dd, double* dtheta_ddp);

/// Curvature of the path implied by lateral state (d, d', d'') over a
/// reference point with curvature kappa_r and its derivative dkappa_r.
double path_curvature(const LateralState& state, double kappa_r,
                      double dkappa_r);

// Partial derivatives of path_curvature w.r.t. (d, d', d'').
Vec3 path_curvature_partials(const LateralState& state, double kappa_r,
                             double dkappa_r);

/// Frenet coordinates of the bounding-circle centers for a vehicle at (s, d)
/// with heading offset theta.
std::vector<FrenetPoint> circle_centers(const FrenetPoint& p, double theta,
                                        const VehicleShape& shape);

// Jacobian of one circle center (s_c, d_c) w.r.t. (d, d'). Rows: (s_c, d_c),
// columns: (d, d').
Eigen::Matrix2d circle_center_jacobian(double theta, double l, double d,
                                       double d_prime, double kappa_r);

/// Frenet -> cartesian. d_prime only affects the returned heading.
CartesianPose frenet_to_cartesian(const ReferenceLine& ref,
                                  const FrenetPoint& p, double d_prime = 0.0);

struct FrenetProjection {
  FrenetPoint point;
  double heading_ref = 0.0;  // reference heading at the projected s
};

/// Cartesian -> frenet by nearest-station scan plus Newton refinement of the
/// tangency condition. Throws std::domain_error when the point is outside the
/// lateral corridor or the projection is ambiguous (near the curvature
/// center).
FrenetProjection cartesian_to_frenet(const ReferenceLine& ref, const Vec2& p,
                                     double max_lateral = 20.0);

}  // namespace gptraj
