#include <doctest.h>

#include <cmath>
#include <random>

#include "gptraj/path_planner.h"
#include "test_helpers.h"

using namespace gptraj;
using test::uniform;

namespace {

struct TestSetup {
  ReferenceLine ref;
  LaneGrid grid;
  EsdfField esdf;
  PathProblem problem;

  TestSetup(std::vector<std::vector<FrenetPoint>> obstacles = {},
            double corridor_half = 3.9, double length = 100.0)
      : ref(test::straight_waypoints(length + 20.0)),
        grid(0.0, length, 8.0, 0.1) {
    grid.rasterize_boundaries(corridor_half);
    for (const auto& poly : obstacles) grid.rasterize_polygon(poly);
    esdf = EsdfField::build(grid);

    problem.chain.q_c = 1.0;
    const int n_seg = 20;
    for (int i = 0; i <= n_seg; ++i) {
      problem.chain.stations.push_back(length * i / n_seg);
    }
    problem.chain.states.assign(n_seg + 1, LateralState{});
    problem.boundary_start = {0, LateralState{}, Vec3::Constant(1e-8)};
    problem.boundary_end = {n_seg, LateralState{}, Vec3::Constant(1e-4)};
    problem.ref = &ref;
    problem.esdf = &esdf;
    problem.vehicle = VehicleShape::from_footprint(4.6, 1.8, 3, 0.1);
    problem.kappa_max = 0.2;
    problem.interp_count = 10;
    problem.frenet_obstacles = std::move(obstacles);
  }
};

double min_clearance(const GpChain& chain, const EsdfField& esdf,
                     const VehicleShape& vehicle, const ReferenceLine& ref) {
  double best = 1e18;
  const auto& st = chain.stations;
  for (double s = st.front(); s <= st.back(); s += 0.05) {
    std::size_t i = 0;
    while (i + 2 < st.size() && s > st[i + 1]) ++i;
    const LateralState d = gp_interpolate(chain.states[i], chain.states[i + 1],
                                          st[i], st[i + 1],
                                          std::clamp(s, st[i], st[i + 1]));
    const double theta = heading_offset(d.d, d.d_prime, ref.kappa_at(s));
    for (const auto& c : circle_centers({s, d.d}, theta, vehicle)) {
      best = std::min(best, esdf.query(c).distance);
    }
  }
  return best;
}

double max_abs_kappa(const GpChain& chain, const ReferenceLine& ref) {
  double worst = 0.0;
  const auto& st = chain.stations;
  for (double s = st.front(); s <= st.back(); s += 0.05) {
    std::size_t i = 0;
    while (i + 2 < st.size() && s > st[i + 1]) ++i;
    const LateralState d = gp_interpolate(chain.states[i], chain.states[i + 1],
                                          st[i], st[i + 1],
                                          std::clamp(s, st[i], st[i + 1]));
    worst = std::max(worst,
                     std::abs(path_curvature(d, ref.kappa_at(s), ref.dkappa_at(s))));
  }
  return worst;
}

}  // namespace

TEST_CASE("penalty branches and continuity") {
  const double x_r = 0.5;
  const double alpha = 10.0;
  CHECK(penalty(x_r, x_r, alpha) == 0.0);
  CHECK(penalty(1.3, x_r, alpha) == 0.0);
  // x = 0 sits exactly on the branch point xbar = x_r; both forms agree.
  CHECK(penalty(0.0, x_r, alpha) == doctest::Approx(alpha * x_r * x_r * x_r));
  CHECK(alpha * (3 * x_r * x_r * x_r - 3 * x_r * x_r * x_r + x_r * x_r * x_r) ==
        doctest::Approx(alpha * x_r * x_r * x_r));

  // First and second derivative continuity at both branch points.
  const double h = 1e-5;
  for (double x0 : {x_r, 0.0}) {
    const double d_lo = (penalty(x0, x_r, alpha) - penalty(x0 - h, x_r, alpha)) / h;
    const double d_hi = (penalty(x0 + h, x_r, alpha) - penalty(x0, x_r, alpha)) / h;
    CHECK(std::abs(d_hi - d_lo) < 1e-3);  // C1 within FD noise of C2 function
    const double dd_lo =
        (penalty(x0, x_r, alpha) - 2 * penalty(x0 - h, x_r, alpha) +
         penalty(x0 - 2 * h, x_r, alpha)) / (h * h);
    const double dd_hi =
        (penalty(x0 + 2 * h, x_r, alpha) - 2 * penalty(x0 + h, x_r, alpha) +
         penalty(x0, x_r, alpha)) / (h * h);
    CHECK(std::abs(dd_hi - dd_lo) < 1e-3);
  }

  // Analytic derivative against central differences everywhere.
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const double x = uniform(rng, -1.5, 1.0);
    const double fd =
        (penalty(x + h, x_r, alpha) - penalty(x - h, x_r, alpha)) / (2 * h);
    CHECK(penalty_derivative(x, x_r, alpha) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("collision factor: free space gives exactly zero cost and gradient") {
  TestSetup setup({{{40.0, -1.0}, {44.0, -1.0}, {44.0, 1.0}, {40.0, 1.0}}});
  PathFactorGraph graph(setup.problem);
  // A station far from the obstacle, centered in the lane.
  std::vector<LateralState> states(21);
  for (const Factor& f : graph.factors()) {
    if (f.type != FactorType::kCollision) continue;
    if (std::abs(f.s_query - 10.0) > 2.0) continue;
    const FactorBlocks b = graph.linearize_factor(f, states);
    CHECK(b.cost == 0.0);
    CHECK(b.g_a.norm() == 0.0);
    CHECK(b.g_b.norm() == 0.0);
  }
}

TEST_CASE("collision residual is zero at the exact clearance boundary") {
  // Straight wall: occupied at d >= 2.05 (cell centers), so the interpolated
  // distance at lateral offset d is (2.05 - d) exactly along the corridor.
  LaneGrid grid(0.0, 50.0, 8.0, 0.1);
  for (int j = 0; j < grid.nd; ++j) {
    if (grid.cell_d(j) >= 2.05) {
      for (int i = 0; i < grid.ns; ++i) grid.set_occupied(i, j);
    }
  }
  const EsdfField esdf = EsdfField::build(grid);

  VehicleShape shape;
  shape.circle_offsets = {0.0};
  shape.radius = 1.0;
  shape.safety_margin = 0.1;

  const double clearance = shape.clearance_required();
  const double d_touch = 2.05 - clearance;  // circle center exactly at limit
  const auto q = esdf.query({25.0, d_touch});
  CHECK(q.distance == doctest::Approx(clearance).epsilon(1e-9));

  PenaltyParams pp;
  const double margin = q.distance - clearance;
  CHECK(penalty(margin + pp.x_r_collision, pp.x_r_collision, pp.alpha) == 0.0);
  // Slightly inside: small positive residual with derivative approaching 0.
  const double eps = 1e-4;
  const double r_in = penalty(-eps + pp.x_r_collision, pp.x_r_collision, pp.alpha);
  CHECK(r_in > 0.0);
  CHECK(r_in < pp.alpha * 8.0 * eps * eps * eps + 1e-15);
}

TEST_CASE("curvature residual examples and symmetry") {
  TestSetup setup;
  PathFactorGraph graph(setup.problem);
  const Factor* cf = nullptr;
  for (const Factor& f : graph.factors()) {
    if (f.type == FactorType::kCurvature && f.station == 5 &&
        f.interp.lambda.isIdentity(1e-12)) {
      cf = &f;
      break;
    }
  }
  REQUIRE(cf != nullptr);

  std::vector<LateralState> states(21);
  // kappa_p = 0 with x_r < kappa_max -> zero.
  CHECK(graph.factor_cost(*cf, states) == 0.0);
  // kappa_p = kappa_max exactly -> still zero (C2 touch at the bound).
  states[5] = {0.0, 0.0, 0.2};
  CHECK(graph.factor_cost(*cf, states) == doctest::Approx(0.0));
  // Even symmetry.
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const double k = uniform(rng, -0.5, 0.5);
    states[5] = {0.0, 0.0, k};
    const double pos = graph.factor_cost(*cf, states);
    states[5] = {0.0, 0.0, -k};
    const double neg = graph.factor_cost(*cf, states);
    CHECK(pos == doctest::Approx(neg).epsilon(1e-12));
  }
}

TEST_CASE("factor gradients match finite differences") {
  TestSetup setup({{{40.0, -1.0}, {44.0, -1.0}, {44.0, 1.0}, {40.0, 1.0}}});
  PathFactorGraph graph(setup.problem);
  std::mt19937_64 rng(13);

  // Pick representative factors of each type, including interpolated ones.
  std::vector<const Factor*> chosen;
  bool got_interp_col = false, got_interp_cur = false;
  for (const Factor& f : graph.factors()) {
    if (f.type == FactorType::kGpPrior && f.station == 3) chosen.push_back(&f);
    if (f.type == FactorType::kObservation && f.station == 0) chosen.push_back(&f);
    if (f.type == FactorType::kCollision && !got_interp_col &&
        f.s_query > 40.0 && f.s_query < 44.0 &&
        !f.interp.lambda.isIdentity(1e-12)) {
      chosen.push_back(&f);
      got_interp_col = true;
    }
    if (f.type == FactorType::kCurvature && !got_interp_cur &&
        !f.interp.lambda.isIdentity(1e-12)) {
      chosen.push_back(&f);
      got_interp_cur = true;
    }
  }
  REQUIRE(chosen.size() == 4);

  const double h = 3e-5;
  for (const Factor* f : chosen) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<LateralState> states(21);
      for (auto& st : states) {
        st = {uniform(rng, -2.5, 2.5), uniform(rng, -0.5, 0.5),
              uniform(rng, -0.3, 0.3)};
      }
      const FactorBlocks b = graph.linearize_factor(*f, states);
      const double base = graph.factor_cost(*f, states);
      for (int side = 0; side < (f->binary ? 2 : 1); ++side) {
        const int station = f->station + side;
        const Vec3 analytic = side == 0 ? b.g_a : b.g_b;
        for (int k = 0; k < 3; ++k) {
          auto perturbed = states;
          Vec3 v = states[station].vec();
          v[k] += h;
          perturbed[station] = LateralState(v);
          const double hi = graph.factor_cost(*f, perturbed);
          v[k] -= 2 * h;
          perturbed[station] = LateralState(v);
          const double lo = graph.factor_cost(*f, perturbed);
          const double fd = (hi - lo) / (2 * h);
          // 1e-4 relative, floored by the cancellation noise of differencing
          // costs of magnitude `base` at step h.
          const double tol = 1e-4 * std::max(std::abs(fd), std::abs(analytic[k])) +
                             1e-10 * base + 1e-8;
          CHECK(std::abs(analytic[k] - fd) < tol);
        }
      }
    }
  }
}

TEST_CASE("solve_map: empty road stays on the center line") {
  TestSetup setup;
  std::vector<LateralState> init(21);
  const PathSolution sol = solve_map(setup.problem, init);
  CHECK(sol.diag.converged);
  for (const auto& st : sol.chain.states) {
    CHECK(std::abs(st.d) < 1e-6);
    CHECK(std::abs(st.d_prime) < 1e-6);
  }
  CHECK(sol.diag.cost.total() < 1e-9);
}

TEST_CASE("solve_map reproduces the jerk-optimal quintic (two stations)") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    PathProblem problem;
    const double length = uniform(rng, 20.0, 80.0);
    problem.chain.stations = {0.0, length};
    problem.chain.states.assign(2, LateralState{});
    const LateralState d0{uniform(rng, -2, 2), uniform(rng, -0.5, 0.5),
                          uniform(rng, -0.2, 0.2)};
    const LateralState dn{uniform(rng, -2, 2), uniform(rng, -0.5, 0.5),
                          uniform(rng, -0.2, 0.2)};
    problem.boundary_start = {0, d0, Vec3::Constant(1e-8)};
    problem.boundary_end = {1, dn, Vec3::Constant(1e-8)};
    problem.esdf = nullptr;
    problem.kappa_max = 0.0;

    const PathSolution sol = solve_map(problem, {LateralState{}, LateralState{}});
    CHECK((sol.chain.states[0].vec() - d0.vec()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((sol.chain.states[1].vec() - dn.vec()).cwiseAbs().maxCoeff() < 1e-6);

    const Quintic q = jerk_optimal_quintic(d0, dn, length);
    for (double s = 0.0; s <= length; s += length / 37.0) {
      const LateralState got = gp_interpolate(
          sol.chain.states[0], sol.chain.states[1], 0.0, length, s);
      CHECK((got.vec() - q.state(s).vec()).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("solve_map clears a mid-lane obstacle") {
  TestSetup setup({{{40.0, -1.0}, {44.0, -1.0}, {44.0, 1.0}, {40.0, 1.0}}});
  PathDiagnostics init_diag;
  const auto init = initialize_path(setup.problem, std::nullopt, &init_diag);
  const PathSolution sol = solve_map(setup.problem, init);
  CHECK(sol.diag.converged);
  CHECK(sol.diag.cost.collision < 1e-6);
  const double clearance = min_clearance(sol.chain, setup.esdf,
                                         setup.problem.vehicle, setup.ref);
  CHECK(clearance >= setup.problem.vehicle.clearance_required() - 0.01);
  CHECK(max_abs_kappa(sol.chain, setup.ref) <= 0.2 * 1.05);
}

TEST_CASE("gauge invariance: common scaling of weights keeps the argmin") {
  TestSetup setup({{{40.0, -1.0}, {44.0, -1.0}, {44.0, 1.0}, {40.0, 1.0}}});
  const auto init = initialize_path(setup.problem, std::nullopt);
  const PathSolution a = solve_map(setup.problem, init);

  PathProblem scaled = setup.problem;
  const double c = 7.0;
  scaled.chain.q_c *= c;
  scaled.penalty.sigma_obs *= c;
  scaled.penalty.sigma_cur *= c;
  scaled.boundary_start.noise_diag *= c;
  scaled.boundary_end.noise_diag *= c;
  const PathSolution b = solve_map(scaled, init);

  for (std::size_t i = 0; i < a.chain.states.size(); ++i) {
    CHECK((a.chain.states[i].vec() - b.chain.states[i].vec())
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
}

TEST_CASE("initialize_path: no obstacles gives the zero chain") {
  TestSetup setup;
  const auto init = initialize_path(setup.problem, std::nullopt);
  for (const auto& st : init) CHECK(std::abs(st.d) < 1e-6);
}

TEST_CASE("initialize_path: centered obstacle, both sides evaluated") {
  TestSetup setup({{{40.0, -1.0}, {44.0, -1.0}, {44.0, 1.0}, {40.0, 1.0}}});
  PathDiagnostics diag;
  const auto init = initialize_path(setup.problem, std::nullopt, &diag);
  CHECK(diag.init_candidates >= 3);  // straight + left + right
  CHECK(diag.init_collision_free);
  PathFactorGraph graph(setup.problem);
  CHECK(graph.cost_breakdown(init).collision <= 1e-12);
}

TEST_CASE("initialize_path: obstacle against the left boundary forces right") {
  TestSetup setup({{{40.0, 1.0}, {46.0, 1.0}, {46.0, 3.9}, {40.0, 3.9}}});
  const auto init = initialize_path(setup.problem, std::nullopt);
  double mid_d = 0.0;
  for (std::size_t i = 8; i <= 9; ++i) mid_d += init[i].d;
  CHECK(mid_d < -0.5);  // passes on the right
}

TEST_CASE("initialize_path honors the side hint") {
  TestSetup setup({{{40.0, -1.0}, {44.0, -1.0}, {44.0, 1.0}, {40.0, 1.0}}});
  const auto left = initialize_path(setup.problem, 1);
  const auto right = initialize_path(setup.problem, -1);
  CHECK(left[8].d > 0.5);
  CHECK(right[8].d < -0.5);
}

TEST_CASE("sampled path maps arc length consistently") {
  TestSetup setup;
  std::vector<LateralState> init(21);
  PathProblem lane_change = setup.problem;
  lane_change.boundary_end.target = {3.5, 0.0, 0.0};
  lane_change.esdf = nullptr;  // target lane is outside this corridor
  const PathSolution sol = solve_map(lane_change, init);
  const SampledPath path(sol.chain, setup.ref);

  CHECK(path.length() > 99.0);
  CHECK(path.length() < 101.0);
  // Cartesian arc length grows at least as fast as needed to cover the
  // lateral motion; the map back to reference s is monotone.
  double prev = -1.0;
  for (double sp = 0.0; sp < path.length(); sp += 1.0) {
    const double sr = path.ref_s_at(sp);
    CHECK(sr > prev);
    prev = sr;
  }
  const PathSamplePoint end = path.state_at(path.length());
  CHECK(end.lateral.d == doctest::Approx(3.5).epsilon(1e-3));
}
