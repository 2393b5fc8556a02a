#include <doctest.h>

#include <cmath>
#include <random>

#include "gptraj/frenet.h"
#include "gptraj/gp_prior.h"
#include "test_helpers.h"

using namespace gptraj;
using test::uniform;

TEST_CASE("frenet_to_cartesian on a straight reference") {
  ReferenceLine ref(test::straight_waypoints(50.0));
  const CartesianPose pose = frenet_to_cartesian(ref, {5.0, 2.0});
  CHECK(pose.position.x() == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(pose.position.y() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(pose.heading == doctest::Approx(0.0));

  // d = 0 lands on the line itself.
  const CartesianPose on_line = frenet_to_cartesian(ref, {17.3, 0.0});
  CHECK((on_line.position - ref.point_at(17.3)).norm() < 1e-12);

  CHECK_THROWS_AS(frenet_to_cartesian(ref, {60.0, 0.0}), std::domain_error);
}

TEST_CASE("frenet_to_cartesian circle offset lands on inner radius") {
  // CCW circle radius 50 centered at (0, 50): d = +1 is toward the center.
  ReferenceLine ref(test::arc_waypoints(1.0 / 50.0, 60.0));
  const Vec2 center(0.0, 50.0);
  const CartesianPose pose = frenet_to_cartesian(ref, {10.0, 1.0});
  CHECK((pose.position - center).norm() == doctest::Approx(49.0).epsilon(1e-4));
}

TEST_CASE("cartesian_to_frenet on a straight reference") {
  ReferenceLine ref(test::straight_waypoints(50.0));
  const FrenetProjection p = cartesian_to_frenet(ref, Vec2(7.0, -1.5));
  CHECK(p.point.s == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(p.point.d == doctest::Approx(-1.5).epsilon(1e-9));

  const FrenetProjection q = cartesian_to_frenet(ref, ref.point_at(23.0));
  CHECK(std::abs(q.point.d) < 1e-9);

  CHECK_THROWS_AS(cartesian_to_frenet(ref, Vec2(10.0, 25.0)),
                  std::domain_error);
}

TEST_CASE("cartesian_to_frenet matches brute-force projection on a circle") {
  ReferenceLine ref(test::arc_waypoints(1.0 / 40.0, 80.0));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const double s_true = uniform(rng, 5.0, 75.0);
    const double d_true = uniform(rng, -4.0, 4.0);
    const Vec2 p = ref.point_at(s_true) + d_true * ref.normal_at(s_true);

    // Nearest 1 mm arc sample of the reference line itself.
    double best_s = 0.0;
    double best_d2 = 1e18;
    for (double s = 0.0; s <= ref.length(); s += 0.001) {
      const double d2 = (ref.point_at(s) - p).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_s = s;
      }
    }
    const FrenetProjection proj = cartesian_to_frenet(ref, p);
    CHECK(std::abs(proj.point.s - best_s) < 2e-3);
    CHECK(std::abs(std::abs(proj.point.d) - std::sqrt(best_d2)) < 2e-3);
  }
}

TEST_CASE("frenet round trip under 1e-6") {
  ReferenceLine ref(test::arc_waypoints(0.015, 100.0));
  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    const double s = uniform(rng, 1.0, 99.0);
    const double d = uniform(rng, -6.0, 6.0);
    const Vec2 p = frenet_to_cartesian(ref, {s, d}).position;
    const FrenetProjection proj = cartesian_to_frenet(ref, p);
    const Vec2 back = frenet_to_cartesian(ref, proj.point).position;
    CHECK((back - p).norm() < 1e-6);
  }
}

TEST_CASE("heading_offset") {
  CHECK(heading_offset(1.0, 0.0, 0.05) == doctest::Approx(0.0));
  CHECK(heading_offset(0.0, 1.0, 0.0) == doctest::Approx(M_PI / 4.0));
  CHECK(heading_offset(2.0, 0.4, 0.1) ==
        doctest::Approx(std::atan(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(heading_offset(10.0, 0.0, 0.2), std::domain_error);

  // Antisymmetry in d' for a straight reference.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const double d = uniform(rng, -3.0, 3.0);
    const double dp = uniform(rng, -1.0, 1.0);
    CHECK(heading_offset(d, -dp, 0.0) ==
          doctest::Approx(-heading_offset(d, dp, 0.0)).epsilon(1e-12));
  }
}

TEST_CASE("path_curvature closed forms") {
  CHECK(path_curvature({0.0, 0.0, 0.05}, 0.0, 0.0) == doctest::Approx(0.05));
  CHECK(path_curvature({0.0, 0.0, 0.0}, 0.1, 0.0) == doctest::Approx(0.1));
  // Reduces to d'' exactly when the reference is straight and d' = 0.
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const double dpp = uniform(rng, -0.3, 0.3);
    CHECK(path_curvature({uniform(rng, -3.0, 3.0), 0.0, dpp}, 0.0, 0.0) ==
          doctest::Approx(dpp).epsilon(1e-12));
  }
  CHECK_THROWS_AS(path_curvature({6.0, 0.0, 0.0}, 0.2, 0.0),
                  std::domain_error);
}

TEST_CASE("path_curvature matches finite-difference curvature of the image") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    test::ClothoidCurve curve{uniform(rng, -0.02, 0.02),
                              uniform(rng, -4e-4, 4e-4)};
    const double length = 80.0;
    Quintic lat = jerk_optimal_quintic(
        {uniform(rng, -2.0, 2.0), uniform(rng, -0.2, 0.2), 0.0},
        {uniform(rng, -2.0, 2.0), uniform(rng, -0.2, 0.2), 0.0}, length);

    const double s0 = uniform(rng, 20.0, 60.0);
    const double h = 0.05;
    Vec2 pts[5];
    for (int k = -2; k <= 2; ++k) {
      const double s = s0 + k * h;
      pts[k + 2] = curve.point(s) + lat.value(s) * curve.normal(s);
    }
    const Vec2 d1 = (pts[3] - pts[1]) / (2.0 * h);
    const Vec2 d2 = (pts[3] - 2.0 * pts[2] + pts[1]) / (h * h);
    const double fd_kappa = (d1.x() * d2.y() - d1.y() * d2.x()) /
                            std::pow(d1.squaredNorm(), 1.5);

    const double kp = path_curvature(lat.state(s0), curve.kappa(s0), curve.c);
    CHECK(std::abs(kp - fd_kappa) < 1e-3);
  }
}

TEST_CASE("path_curvature_partials match finite differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const LateralState st{uniform(rng, -3.0, 3.0), uniform(rng, -0.6, 0.6),
                          uniform(rng, -0.2, 0.2)};
    const double kr = uniform(rng, -0.05, 0.05);
    const double dkr = uniform(rng, -0.005, 0.005);
    const Vec3 grad = path_curvature_partials(st, kr, dkr);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vec3 hi = st.vec();
      Vec3 lo = st.vec();
      hi[k] += h;
      lo[k] -= h;
      const double fd = (path_curvature(LateralState(hi), kr, dkr) -
                         path_curvature(LateralState(lo), kr, dkr)) /
                        (2.0 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("circle_centers") {
  VehicleShape shape;
  shape.circle_offsets = {-1.0, 1.0};
  shape.radius = 1.0;
  auto centers = circle_centers({10.0, 0.5}, 0.0, shape);
  REQUIRE(centers.size() == 2);
  CHECK(centers[0].s == doctest::Approx(9.0));
  CHECK(centers[0].d == doctest::Approx(0.5));
  CHECK(centers[1].s == doctest::Approx(11.0));
  CHECK(centers[1].d == doctest::Approx(0.5));

  shape.circle_offsets = {0.0};
  centers = circle_centers({3.0, -1.0}, 0.7, shape);
  CHECK(centers[0].s == doctest::Approx(3.0));
  CHECK(centers[0].d == doctest::Approx(-1.0));

  shape.circle_offsets = {2.0};
  const double theta = M_PI / 6.0;
  centers = circle_centers({1.0, 0.0}, theta, shape);
  CHECK(centers[0].s == doctest::Approx(1.0 + 2.0 * std::cos(theta)));
  CHECK(centers[0].d == doctest::Approx(2.0 * std::sin(theta)));
}

TEST_CASE("reference line curvature consistent with heading derivative") {
  ReferenceLine ref(test::arc_waypoints(0.02, 80.0));
  const auto& s = ref.arclength();
  const auto& heading = ref.heading();
  const auto& kappa = ref.kappa();
  for (std::size_t i = 5; i + 5 < s.size(); ++i) {
    const double fd =
        (heading[i + 1] - heading[i - 1]) / (s[i + 1] - s[i - 1]);
    CHECK(std::abs(fd - kappa[i]) < 0.05 * std::abs(kappa[i]) + 1e-5);
  }
  // Interpolated curvature close to the true constant.
  for (double q = 5.0; q < 75.0; q += 3.7) {
    CHECK(ref.kappa_at(q) == doctest::Approx(0.02).epsilon(0.02));
  }
}

TEST_CASE("vehicle shape from footprint") {
  const VehicleShape shape = VehicleShape::from_footprint(4.8, 1.9, 3, 0.1);
  REQUIRE(shape.circle_offsets.size() == 3);
  CHECK(shape.circle_offsets[0] == doctest::Approx(-1.6));
  CHECK(shape.circle_offsets[1] == doctest::Approx(0.0));
  CHECK(shape.circle_offsets[2] == doctest::Approx(1.6));
  CHECK(shape.radius == doctest::Approx(0.5 * std::hypot(1.6, 1.9)));
}
