#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <random>

#include "gptraj/gp_prior.h"
#include "test_helpers.h"

using namespace gptraj;
using test::uniform;

namespace {

// Independent quintic Hermite oracle: solve the 6x6 boundary-condition system
// with a dense LU, then evaluate value / first / second derivative.
struct HermiteOracle {
  Eigen::Matrix<double, 6, 1> coeffs;

  HermiteOracle(const LateralState& a, const LateralState& b, double length) {
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> rhs;
    const double t = length;
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 2) = 2.0;
    for (int k = 0; k < 6; ++k) {
      m(3, k) = std::pow(t, k);
      if (k >= 1) m(4, k) = k * std::pow(t, k - 1);
      if (k >= 2) m(5, k) = k * (k - 1) * std::pow(t, k - 2);
    }
    rhs << a.d, a.d_prime, a.d_pprime, b.d, b.d_prime, b.d_pprime;
    coeffs = m.fullPivLu().solve(rhs);
  }

  LateralState state(double x) const {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
    for (int k = 5; k >= 0; --k) v = v * x + coeffs[k];
    for (int k = 5; k >= 1; --k) d1 = d1 * x + k * coeffs[k];
    for (int k = 5; k >= 2; --k) d2 = d2 * x + k * (k - 1) * coeffs[k];
    return {v, d1, d2};
  }
};

LateralState random_state(std::mt19937_64& rng) {
  return {uniform(rng, -3.0, 3.0), uniform(rng, -0.8, 0.8),
          uniform(rng, -0.4, 0.4)};
}

}  // namespace

TEST_CASE("state transition closed form") {
  Mat3 phi = state_transition(1.0);
  Mat3 expect;
  expect << 1, 1, 0.5, 0, 1, 1, 0, 0, 1;
  CHECK((phi - expect).norm() == 0.0);

  CHECK((state_transition(0.0) - Mat3::Identity()).norm() == 0.0);

  phi = state_transition(2.0);
  expect << 1, 2, 2, 0, 1, 2, 0, 0, 1;
  CHECK((phi - expect).norm() == 0.0);
}

TEST_CASE("state transition composes exactly") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const double a = uniform(rng, 0.0, 10.0);
    const double b = uniform(rng, 0.0, 10.0);
    const Mat3 lhs = state_transition(a + b);
    const Mat3 rhs = state_transition(b) * state_transition(a);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("process noise closed form") {
  const Mat3 q = process_noise(1.0, 1.0);
  Mat3 expect;
  expect << 1.0 / 20, 1.0 / 8, 1.0 / 6,
            1.0 / 8, 1.0 / 3, 1.0 / 2,
            1.0 / 6, 1.0 / 2, 1.0;
  CHECK((q - expect).cwiseAbs().maxCoeff() < 1e-15);

  CHECK(process_noise(1.5, 0.0).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(process_noise(0.0, 1.0), std::domain_error);
}

TEST_CASE("process noise matches quadrature of the defining integral") {
  // Q = integral over the segment of Phi(ds - tau) F Qc F' Phi(ds - tau)';
  // the integrand is polynomial of degree 4, so 5-point Gauss-Legendre is
  // exact up to rounding.
  const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                           0.5384693101056831, 0.9061798459386640};
  const double weights[5] = {0.2369268850561891, 0.4786286704993665,
                             0.5688888888888889, 0.4786286704993665,
                             0.2369268850561891};
  for (double ds : {0.1, 1.0, 2.0, 5.0}) {
    Mat3 quad = Mat3::Zero();
    for (int i = 0; i < 5; ++i) {
      const double tau = 0.5 * ds * (nodes[i] + 1.0);
      const double delta = ds - tau;
      const Vec3 v(0.5 * delta * delta, delta, 1.0);
      quad += weights[i] * 0.5 * ds * (v * v.transpose());
    }
    CHECK((quad - process_noise(ds, 1.0)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("process noise inverse and positive definiteness") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const double ds = uniform(rng, 0.05, 12.0);
    const double qc = uniform(rng, 0.1, 5.0);
    const Mat3 q = process_noise(ds, qc);
    const Mat3 qi = process_noise_inverse(ds, qc);
    CHECK((q * qi - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((q - q.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::LLT<Mat3> llt(q);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("gp prior residual") {
  const auto zero = gp_prior_residual({}, {}, 1.0, 1.0);
  CHECK(zero.residual.norm() == 0.0);

  // Constant-slope motion is consistent with the zero-jerk mean.
  const auto slope =
      gp_prior_residual({0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}, 1.0, 1.0);
  CHECK(slope.residual.norm() < 1e-15);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const LateralState a = random_state(rng);
    const LateralState b = random_state(rng);
    const double ds = uniform(rng, 0.2, 8.0);
    const auto res = gp_prior_residual(a, b, ds, 1.0);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vec3 pa = a.vec(), ma = a.vec();
      pa[k] += h;
      ma[k] -= h;
      const Vec3 fd = (gp_prior_residual(LateralState(pa), b, ds, 1.0).residual -
                       gp_prior_residual(LateralState(ma), b, ds, 1.0).residual) /
                      (2.0 * h);
      CHECK((fd - res.jac_first.col(k)).cwiseAbs().maxCoeff() < 1e-6);

      Vec3 pb = b.vec(), mb = b.vec();
      pb[k] += h;
      mb[k] -= h;
      const Vec3 fdb = (gp_prior_residual(a, LateralState(pb), ds, 1.0).residual -
                        gp_prior_residual(a, LateralState(mb), ds, 1.0).residual) /
                       (2.0 * h);
      CHECK((fdb - res.jac_second.col(k)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("gp interpolation reproduces knots and the derived midpoint") {
  const LateralState a{0.0, 0.0, 0.0};
  const LateralState b{1.0, 0.0, 0.0};
  const LateralState at_start = gp_interpolate(a, b, 0.0, 1.0, 0.0);
  CHECK((at_start.vec() - a.vec()).cwiseAbs().maxCoeff() < 1e-15);
  const LateralState at_end = gp_interpolate(a, b, 0.0, 1.0, 1.0);
  CHECK((at_end.vec() - b.vec()).cwiseAbs().maxCoeff() < 1e-15);

  const LateralState mid = gp_interpolate(a, b, 0.0, 1.0, 0.5);
  CHECK(mid.d == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mid.d_prime == doctest::Approx(1.875).epsilon(1e-12));
  CHECK(mid.d_pprime == doctest::Approx(0.0).epsilon(1e-12));

  const LateralState quarter = gp_interpolate(a, b, 0.0, 1.0, 0.25);
  const HermiteOracle oracle(a, b, 1.0);
  CHECK((quarter.vec() - oracle.state(0.25).vec()).cwiseAbs().maxCoeff() <
        1e-9);

  CHECK_THROWS_AS(gp_interpolate(a, b, 0.0, 1.0, 1.5), std::domain_error);
}

TEST_CASE("gp interpolation equals quintic Hermite on random segments") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const LateralState a = random_state(rng);
    const LateralState b = random_state(rng);
    const double s0 = uniform(rng, -5.0, 5.0);
    const double len = uniform(rng, 0.5, 15.0);
    const double sq = s0 + uniform(rng, 0.0, 1.0) * len;
    const LateralState got = gp_interpolate(a, b, s0, s0 + len, sq);
    const HermiteOracle oracle(a, b, len);
    const LateralState want = oracle.state(sq - s0);
    CHECK((got.vec() - want.vec()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("jerk optimal quintic boundary and known coefficients") {
  const Quintic zero = jerk_optimal_quintic({}, {}, 3.0);
  for (double c : zero.coeffs) CHECK(std::abs(c) < 1e-12);

  const Quintic step = jerk_optimal_quintic({0, 0, 0}, {1, 0, 0}, 1.0);
  const double expect[6] = {0, 0, 0, 10, -15, 6};
  for (int k = 0; k < 6; ++k) {
    CHECK(step.coeffs[k] == doctest::Approx(expect[k]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(jerk_optimal_quintic({}, {}, 0.0), std::domain_error);
}

TEST_CASE("jerk optimal quintic beats random C2 perturbations") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const LateralState a = random_state(rng);
    const LateralState b = random_state(rng);
    const double len = uniform(rng, 5.0, 40.0);
    const Quintic q = jerk_optimal_quintic(a, b, len);
    const double base_cost = q.jerk_cost(len);

    for (int pert = 0; pert < 100; ++pert) {
      // Perturbation with vanishing value and first two derivatives at both
      // ends: (u (1-u))^3 * (c0 + c1 u + c2 u^2), u = s / len. The candidate
      // is a degree-9 polynomial, so its jerk cost is computed exactly from
      // the coefficients.
      const double c0 = uniform(rng, -2.0, 2.0);
      const double c1 = uniform(rng, -2.0, 2.0);
      const double c2 = uniform(rng, -2.0, 2.0);
      // u^3 (1-u)^3 = u^3 - 3u^4 + 3u^5 - u^6
      const double w_u[7] = {0, 0, 0, 1, -3, 3, -1};
      double cand_u[10] = {0};
      for (int k = 0; k < 7; ++k) {
        cand_u[k] += w_u[k] * c0;
        cand_u[k + 1] += w_u[k] * c1;
        cand_u[k + 2] += w_u[k] * c2;
      }
      double cand_s[10];  // convert u = s/len to powers of s
      for (int k = 0; k < 10; ++k) cand_s[k] = cand_u[k] / std::pow(len, k);
      for (int k = 0; k < 6; ++k) cand_s[k] += q.coeffs[k];
      // Third derivative coefficients (degree 6), then exact integral of the
      // square over [0, len].
      double d3[7];
      for (int k = 0; k < 7; ++k) {
        d3[k] = (k + 3.0) * (k + 2.0) * (k + 1.0) * cand_s[k + 3];
      }
      double cost = 0.0;
      for (int k = 0; k < 7; ++k) {
        for (int l = 0; l < 7; ++l) {
          cost += d3[k] * d3[l] * std::pow(len, k + l + 1) / (k + l + 1.0);
        }
      }
      CHECK(base_cost <= cost + 1e-9 * std::max(1.0, cost));
    }
  }
}

TEST_CASE("quintic jerk cost closed form matches sampling") {
  std::mt19937_64 rng(41);
  const Quintic q =
      jerk_optimal_quintic(random_state(rng), random_state(rng), 12.0);
  const int n = 20000;
  const double h = 12.0 / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) * h;
    acc += q.third(s) * q.third(s) * h;
  }
  CHECK(q.jerk_cost(12.0) == doctest::Approx(acc).epsilon(1e-6));
}
