#pragma once

#include <array>
#include <vector>

#include "gptraj/types.h"

namespace gptraj {

/// Chain of lateral states at strictly increasing arc-length stations, under a
/// white-noise-on-jerk motion prior with scalar power spectral density q_c.
struct GpChain {
  std::vector<double> stations;
  std::vector<LateralState> states;
  double q_c = 1.0;

  std::size_t segments() const {
    return stations.empty() ? 0 : stations.size() - 1;
  }
};

/// State transition over a step: Phi = [[1, ds, ds^2/2], [0, 1, ds], [0, 0, 1]].
Mat3 state_transition(double ds);

/// Process-noise covariance of the white-noise-on-jerk model over a step.
/// Throws std::domain_error for ds <= 0.
Mat3 process_noise(double ds, double q_c);

/// Closed-form inverse of process_noise (the segment information matrix).
Mat3 process_noise_inverse(double ds, double q_c);

/// Motion-prior residual between consecutive states:
///   r = Phi(ds) * d_i - d_next,  weight = Q^-1(ds, q_c).
struct GpPriorResidual {
  Vec3 residual;
  Mat3 jac_first;   // d r / d d_i     (= Phi)
  Mat3 jac_second;  // d r / d d_next  (= -I)
  Mat3 weight;      // Q^-1
};

GpPriorResidual gp_prior_residual(const LateralState& d_i,
                                  const LateralState& d_next, double ds,
                                  double q_c);

/// Interpolation matrices for a state inside a segment:
///   d(s_query) = lambda * d_i + psi * d_next
/// These are also the jacobians of the interpolated state w.r.t. the two
/// support states, which is how constraint factors at interpolated stations
/// attach to the chain. Independent of q_c (it cancels).
struct GpInterpolator {
  Mat3 lambda;
  Mat3 psi;

  LateralState interpolate(const LateralState& d_i,
                           const LateralState& d_next) const {
    return LateralState(lambda * d_i.vec() + psi * d_next.vec());
  }
};

/// Throws std::domain_error when s_query is outside [s_i, s_next].
GpInterpolator gp_interpolation_matrices(double s_i, double s_next,
                                         double s_query);

LateralState gp_interpolate(const LateralState& d_i,
                            const LateralState& d_next, double s_i,
                            double s_next, double s_query);

/// Quintic polynomial d(s) = sum c_k s^k, with derivative evaluation.
struct Quintic {
  std::array<double, 6> coeffs{};

  double value(double s) const;
  double first(double s) const;
  double second(double s) const;
  double third(double s) const;
  LateralState state(double s) const {
    return {value(s), first(s), second(s)};
  }
  /// Integral of the squared third derivative over [0, length].
  double jerk_cost(double length) const;
};

/// The unique quintic matching both boundary states over [0, length]; it
/// minimizes the integral of squared d''' among all C^2 connections.
/// Throws std::domain_error for length <= 0.
Quintic jerk_optimal_quintic(const LateralState& d0, const LateralState& dn,
                             double length);

}  // namespace gptraj
