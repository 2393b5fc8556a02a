#include "gptraj/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace gptraj {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

std::vector<AgentPrediction> make_predictions(const Scenario& scenario) {
  std::vector<AgentPrediction> predictions;
  for (const AgentSpec& a : scenario.agents) {
    AgentPrediction p;
    p.position = Vec2(a.x, a.y);
    p.velocity = Vec2(a.vx, a.vy);
    p.heading = std::hypot(a.vx, a.vy) > 0.1 ? std::atan2(a.vy, a.vx)
                                             : a.heading;
    p.length = a.length;
    p.width = a.width;
    predictions.push_back(p);
  }
  return predictions;
}

}  // namespace

PlanResult plan_scenario(const Scenario& scenario, const PlanOptions& options) {
  PlanResult result;
  const double t_start = now_ms();
  const PlannerParams& params = scenario.params;

  ReferenceLine ref;
  PathProblem problem;
  double s0 = 0.0;
  try {
    ref = ReferenceLine(scenario.reference_line);
    const FrenetProjection ego_proj =
        cartesian_to_frenet(ref, Vec2(scenario.ego.x, scenario.ego.y));
    s0 = ego_proj.point.s;
    const double dtheta = wrap_angle(scenario.ego.heading - ego_proj.heading_ref);
    const double kappa0 = ref.kappa_at(s0);
    const double d0 = ego_proj.point.d;
    const double d0_prime = (1.0 - kappa0 * d0) * std::tan(dtheta);

    const double length =
        std::min(params.path_length, ref.length() - s0 - 2.0);
    if (length < 10.0) {
      result.failure_stage = "setup";
      result.error = "reference line too short ahead of the ego";
      return result;
    }
    result.chain_start_s = s0;

    const auto [d_min, d_max] = scenario.effective_corridor();
    result.corridor_d_min = d_min;
    result.corridor_d_max = d_max;

    // ESDF over the planning window.
    const double t_esdf = now_ms();
    const double d_extent = std::max(
        params.esdf_d_extent,
        2.0 * std::max(std::abs(d_min), std::abs(d_max)) + 1.6);
    LaneGrid grid(s0, length, d_extent, params.esdf_resolution);
    grid.rasterize_outside(d_min, d_max);
    for (const auto& polygon : scenario.static_obstacles) {
      std::vector<FrenetPoint> frenet_poly;
      bool ok = true;
      for (const Vec2& v : polygon) {
        try {
          frenet_poly.push_back(cartesian_to_frenet(ref, v).point);
        } catch (const std::exception&) {
          ok = false;
          break;
        }
      }
      if (!ok || frenet_poly.size() < 3) continue;
      grid.rasterize_polygon(frenet_poly);
      result.frenet_obstacles.push_back(std::move(frenet_poly));
    }
    auto esdf = std::make_shared<EsdfField>(EsdfField::build(grid));
    result.esdf = esdf;
    result.timing.esdf_ms = now_ms() - t_esdf;

    // Path problem over the chain [s0, s0 + length].
    problem.chain.q_c = params.q_c;
    const int n = params.n_segments;
    for (int i = 0; i <= n; ++i) {
      problem.chain.stations.push_back(s0 + length * i / n);
    }
    problem.chain.states.assign(n + 1, LateralState{});
    problem.boundary_start = {0, LateralState{d0, d0_prime, 0.0},
                              Vec3::Constant(params.boundary_start_noise)};
    const double target = scenario.behavior_target_offset();
    problem.boundary_end = {n, LateralState{target, 0.0, 0.0},
                            Vec3::Constant(params.boundary_end_noise)};
    if (scenario.behavior != Behavior::kLaneKeep) {
      const double complete_by =
          scenario.complete_by_s.value_or(params.complete_by_s);
      const int station = std::clamp(
          static_cast<int>(std::lround(complete_by / (length / n))), 1, n - 1);
      problem.extra_observations.push_back(
          {station, LateralState{target, 0.0, 0.0}, Vec3(0.05, 1e3, 1e3)});
    }
    problem.ref = &ref;
    problem.esdf = esdf.get();
    problem.vehicle = VehicleShape::from_footprint(
        scenario.vehicle.length, scenario.vehicle.width,
        scenario.vehicle.n_circles, scenario.vehicle.safety_margin,
        scenario.vehicle.ref_offset);
    problem.kappa_max = scenario.kappa_max;
    problem.interp_count = params.interp_count;
    problem.penalty = params.penalty;
    problem.frenet_obstacles = result.frenet_obstacles;

    const double t_path = now_ms();
    const auto init = initialize_path(problem, std::nullopt, &result.path_diag);
    PathSolution sol = solve_map(problem, init);
    result.path_diag.iterations = sol.diag.iterations;
    result.path_diag.converged = sol.diag.converged;
    result.path_diag.cost = sol.diag.cost;
    result.path_diag.error = sol.diag.error;
    result.timing.path_ms = now_ms() - t_path;
    if (!sol.diag.error.empty()) {
      result.failure_stage = "path";
      result.error = sol.diag.error;
      result.timing.total_ms = now_ms() - t_start;
      return result;
    }

    GpChain chain = problem.chain;
    chain.states = sol.chain.states;
    SampledPath path(chain, ref);

    // Speed planning along the fixed path.
    const double t_speed = now_ms();
    const auto predictions = make_predictions(scenario);
    const SpeedLimits& limits = scenario.limits;
    const SearchParams& search_params = params.search;
    const double horizon = search_params.n_rounds * search_params.t_f;
    const Vec3 init_state(0.0, scenario.ego.speed, scenario.ego.accel);

    auto plan_speed = [&](const SampledPath& p, std::vector<BlockedRegion>* out_regions,
                          SearchResult* out_search, bool* fallback) {
      const auto regions = project_trajectories(
          p.samples(), predictions, horizon, search_params.t_s,
          scenario.vehicle.length, scenario.vehicle.width);
      if (out_regions) *out_regions = regions;
      auto kappa = [&p](double s) { return p.abs_kappa_at(s); };
      auto ref_speed = [&](double s) { return limits.capped_speed(kappa(s)); };
      const auto found = search_speed_profile(init_state, regions, limits,
                                              params.speed_weights,
                                              search_params, ref_speed);
      if (out_search) *out_search = found;
      if (!found.feasible) {
        if (fallback) *fallback = true;
        return max_braking_profile(init_state, limits, search_params);
      }
      SmoothDiagnostics smooth_diag;
      StProfile profile =
          smooth_profile(found.chain, regions, limits, search_params, kappa,
                         init_state, &smooth_diag, params.smooth_weights);
      result.smooth_diag = smooth_diag;
      return profile;
    };

    SearchResult search_result;
    StProfile profile;
    try {
      profile = plan_speed(path, &result.regions, &search_result,
                           &result.search_fallback);
    } catch (const std::exception& e) {
      result.failure_stage = "speed";
      result.error = e.what();
      result.timing.speed_ms = now_ms() - t_speed;
      result.timing.total_ms = now_ms() - t_start;
      return result;
    }
    result.explored_nodes = search_result.explored;
    result.coarse_chain = search_result.chain;
    result.timing.speed_ms = now_ms() - t_speed;

    // Incremental refinement of the fused trajectory.
    const double t_refine = now_ms();
    LatAccParams lat = params.lat_acc;
    lat.a_lat_max = limits.a_lat_max;
    lat.incremental = options.incremental;
    PathFactorGraph graph(problem);
    const RefineResult refined = refine(
        graph, sol.chain.states, ref, profile, lat,
        [&](const SampledPath& p) { return plan_speed(p, nullptr, nullptr, nullptr); });
    result.refine_log = refined.log;
    result.refine_iterations = refined.iterations;
    result.refine_feasible = refined.feasible;
    if (!refined.error.empty()) result.error = refined.error;
    result.timing.refine_ms = now_ms() - t_refine;

    chain.states = refined.states;
    path = SampledPath(chain, ref);
    result.path_samples = path.samples();
    result.profile = refined.profile;
    // Regions for the final path (reporting and containment checks).
    result.regions = project_trajectories(
        path.samples(), predictions, horizon, search_params.t_s,
        scenario.vehicle.length, scenario.vehicle.width);

    // Fused trajectory, cut where the path ends.
    const StProfile& final_profile = result.profile;
    const double t_end =
        std::min(final_profile.horizon(),
                 final_profile.time_at_s(path.length() - 1e-6));
    result.min_clearance = 1e18;
    for (double t = 0.0; t <= t_end + 1e-9; t += options.sample_dt) {
      TrajectorySample sample;
      sample.t = t;
      sample.s_path = final_profile.s_at(t);
      sample.v = final_profile.v_at(t);
      sample.a_long = final_profile.a_at(t);
      const PathSamplePoint p = path.state_at(sample.s_path);
      sample.x = p.position.x();
      sample.y = p.position.y();
      sample.heading = p.heading;
      sample.kappa = p.kappa;
      sample.s_ref = p.s_ref;
      sample.d = p.lateral.d;
      sample.a_lat = lateral_acceleration(p.lateral, sample.v, sample.a_long);
      result.trajectory.push_back(sample);

      result.max_abs_kappa = std::max(result.max_abs_kappa, std::abs(p.kappa));
      result.max_abs_a_lat = std::max(result.max_abs_a_lat, std::abs(sample.a_lat));
      const double theta =
          heading_offset(p.lateral.d, p.lateral.d_prime, ref.kappa_at(p.s_ref));
      for (const FrenetPoint& c :
           circle_centers({p.s_ref, p.lateral.d}, theta, problem.vehicle)) {
        result.min_clearance =
            std::min(result.min_clearance, esdf->query(c).distance);
      }
    }
    result.collision_free =
        result.min_clearance >= problem.vehicle.radius - 1e-6;
    result.curvature_ok = result.max_abs_kappa <= scenario.kappa_max * 1.05;
    result.success = result.collision_free && result.curvature_ok;
  } catch (const std::exception& e) {
    if (result.failure_stage.empty()) result.failure_stage = "pipeline";
    result.error = e.what();
  }
  result.timing.total_ms = now_ms() - t_start;
  return result;
}

}  // namespace gptraj
