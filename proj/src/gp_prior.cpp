#include "gptraj/gp_prior.h"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace gptraj {

Mat3 state_transition(double ds) {
  Mat3 phi = Mat3::Identity();
  phi(0, 1) = ds;
  phi(0, 2) = 0.5 * ds * ds;
  phi(1, 2) = ds;
  return phi;
}

Mat3 process_noise(double ds, double q_c) {
  if (ds <= 0.0) {
    throw std::domain_error("process_noise: step must be positive");
  }
  const double s2 = ds * ds;
  const double s3 = s2 * ds;
  const double s4 = s3 * ds;
  const double s5 = s4 * ds;
  Mat3 q;
  q << s5 / 20.0, s4 / 8.0, s3 / 6.0,
       s4 / 8.0,  s3 / 3.0, s2 / 2.0,
       s3 / 6.0,  s2 / 2.0, ds;
  return q_c * q;
}

Mat3 process_noise_inverse(double ds, double q_c) {
  if (ds <= 0.0 || q_c <= 0.0) {
    throw std::domain_error("process_noise_inverse: needs ds > 0, q_c > 0");
  }
  const double s2 = ds * ds;
  const double s3 = s2 * ds;
  const double s4 = s3 * ds;
  const double s5 = s4 * ds;
  Mat3 qi;
  qi << 720.0 / s5, -360.0 / s4, 60.0 / s3,
        -360.0 / s4, 192.0 / s3, -36.0 / s2,
        60.0 / s3,  -36.0 / s2,  9.0 / ds;
  return qi / q_c;
}

GpPriorResidual gp_prior_residual(const LateralState& d_i,
                                  const LateralState& d_next, double ds,
                                  double q_c) {
  GpPriorResidual out;
  const Mat3 phi = state_transition(ds);
  out.residual = phi * d_i.vec() - d_next.vec();
  out.jac_first = phi;
  out.jac_second = -Mat3::Identity();
  out.weight = process_noise_inverse(ds, q_c);
  return out;
}

GpInterpolator gp_interpolation_matrices(double s_i, double s_next,
                                         double s_query) {
  if (s_query < s_i - 1e-12 || s_query > s_next + 1e-12) {
    throw std::domain_error("gp_interpolate: query outside segment");
  }
  const double a = std::clamp(s_query - s_i, 0.0, s_next - s_i);
  const double b = (s_next - s_i) - a;

  GpInterpolator out;
  if (a <= 0.0) {
    out.lambda = Mat3::Identity();
    out.psi = Mat3::Zero();
    return out;
  }
  if (b <= 0.0) {
    out.lambda = Mat3::Zero();
    out.psi = Mat3::Identity();
    return out;
  }
  // q_c cancels between Q_a and Q_total^-1; use 1.
  const Mat3 q_a = process_noise(a, 1.0);
  const Mat3 qi_total = process_noise_inverse(s_next - s_i, 1.0);
  out.psi = q_a * state_transition(b).transpose() * qi_total;
  out.lambda = state_transition(a) - out.psi * state_transition(s_next - s_i);
  return out;
}

LateralState gp_interpolate(const LateralState& d_i,
                            const LateralState& d_next, double s_i,
                            double s_next, double s_query) {
  return gp_interpolation_matrices(s_i, s_next, s_query)
      .interpolate(d_i, d_next);
}

double Quintic::value(double s) const {
  double acc = 0.0;
  for (int k = 5; k >= 0; --k) acc = acc * s + coeffs[k];
  return acc;
}

double Quintic::first(double s) const {
  double acc = 0.0;
  for (int k = 5; k >= 1; --k) acc = acc * s + k * coeffs[k];
  return acc;
}

double Quintic::second(double s) const {
  double acc = 0.0;
  for (int k = 5; k >= 2; --k) acc = acc * s + k * (k - 1) * coeffs[k];
  return acc;
}

double Quintic::third(double s) const {
  return 6.0 * coeffs[3] + 24.0 * coeffs[4] * s + 60.0 * coeffs[5] * s * s;
}

double Quintic::jerk_cost(double length) const {
  // d''' = 6 c3 + 24 c4 s + 60 c5 s^2; integrate the square analytically.
  const double c3 = 6.0 * coeffs[3];
  const double c4 = 24.0 * coeffs[4];
  const double c5 = 60.0 * coeffs[5];
  const double l = length;
  const double l2 = l * l;
  const double l3 = l2 * l;
  const double l4 = l3 * l;
  const double l5 = l4 * l;
  return c3 * c3 * l + c3 * c4 * l2 +
         (c4 * c4 + 2.0 * c3 * c5) * l3 / 3.0 + 0.5 * c4 * c5 * l4 +
         c5 * c5 * l5 / 5.0;
}

Quintic jerk_optimal_quintic(const LateralState& d0, const LateralState& dn,
                             double length) {
  if (length <= 0.0) {
    throw std::domain_error("jerk_optimal_quintic: length must be positive");
  }
  Quintic q;
  q.coeffs[0] = d0.d;
  q.coeffs[1] = d0.d_prime;
  q.coeffs[2] = 0.5 * d0.d_pprime;

  const double t = length;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double t5 = t4 * t;
  Mat3 a;
  a << t3, t4, t5,
       3.0 * t2, 4.0 * t3, 5.0 * t4,
       6.0 * t, 12.0 * t2, 20.0 * t3;
  Vec3 b;
  b << dn.d - (q.coeffs[0] + q.coeffs[1] * t + q.coeffs[2] * t2),
       dn.d_prime - (q.coeffs[1] + 2.0 * q.coeffs[2] * t),
       dn.d_pprime - 2.0 * q.coeffs[2];
  const Vec3 x = a.partialPivLu().solve(b);
  q.coeffs[3] = x[0];
  q.coeffs[4] = x[1];
  q.coeffs[5] = x[2];
  return q;
}

}  // namespace gptraj
