#include "gptraj/scenario.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gptraj {

using nlohmann::json;

std::pair<double, double> Scenario::effective_corridor() const {
  if (corridor.has_value()) return *corridor;
  const double half = 0.5 * lane_width;
  switch (behavior) {
    case Behavior::kLaneChangeLeft:
      return {-half, half + lane_width};
    case Behavior::kLaneChangeRight:
      return {-half - lane_width, half};
    case Behavior::kLaneKeep:
    default:
      return {-half, half};
  }
}

double Scenario::behavior_target_offset() const {
  switch (behavior) {
    case Behavior::kLaneChangeLeft:
      return lane_width;
    case Behavior::kLaneChangeRight:
      return -lane_width;
    case Behavior::kLaneKeep:
    default:
      return 0.0;
  }
}

namespace {

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

}  // namespace

std::optional<Scenario> parse_scenario(const std::string& json_text,
                                       std::vector<std::string>* errors) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    if (errors) errors->push_back(std::string("json parse error: ") + e.what());
    return std::nullopt;
  }

  Scenario s;
  try {
    if (!j.contains("reference_line") || !j["reference_line"].is_array()) {
      if (errors) errors->push_back("missing reference_line array");
      return std::nullopt;
    }
    for (const auto& p : j["reference_line"]) {
      s.reference_line.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    s.lane_width = get_num(j, "lane_width", 3.5);
    if (j.contains("corridor")) {
      s.corridor = {{j["corridor"].at("d_min").get<double>(),
                     j["corridor"].at("d_max").get<double>()}};
    }
    if (j.contains("ego")) {
      const auto& e = j["ego"];
      s.ego.x = get_num(e, "x", 0.0);
      s.ego.y = get_num(e, "y", 0.0);
      s.ego.heading = get_num(e, "heading", 0.0);
      s.ego.speed = get_num(e, "speed", 8.0);
      s.ego.accel = get_num(e, "accel", 0.0);
    }
    if (j.contains("vehicle")) {
      const auto& v = j["vehicle"];
      s.vehicle.length = get_num(v, "length", 4.6);
      s.vehicle.width = get_num(v, "width", 1.8);
      s.vehicle.n_circles = static_cast<int>(get_num(v, "n_circles", 3));
      s.vehicle.safety_margin = get_num(v, "safety_margin", 0.1);
      s.vehicle.ref_offset = get_num(v, "ref_offset", 0.0);
    }
    if (j.contains("static_obstacles")) {
      for (const auto& poly : j["static_obstacles"]) {
        std::vector<Vec2> vertices;
        for (const auto& p : poly) {
          vertices.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        s.static_obstacles.push_back(std::move(vertices));
      }
    }
    if (j.contains("agents")) {
      for (const auto& a : j["agents"]) {
        AgentSpec agent;
        agent.x = get_num(a, "x", 0.0);
        agent.y = get_num(a, "y", 0.0);
        agent.heading = get_num(a, "heading", 0.0);
        agent.vx = get_num(a, "vx", 0.0);
        agent.vy = get_num(a, "vy", 0.0);
        agent.length = get_num(a, "length", 4.5);
        agent.width = get_num(a, "width", 2.0);
        s.agents.push_back(agent);
      }
    }
    if (j.contains("limits")) {
      const auto& l = j["limits"];
      s.limits.a_min = get_num(l, "a_min", -4.0);
      s.limits.a_max = get_num(l, "a_max", 2.0);
      s.limits.v_road = get_num(l, "v_road", 15.0);
      s.limits.a_lat_max = get_num(l, "a_lat_max", 2.5);
      s.kappa_max = get_num(l, "kappa_max", 0.2);
    }
    if (j.contains("behavior")) {
      const auto& b = j["behavior"];
      const std::string type = b.value("type", "lane_keep");
      if (type == "lane_keep") {
        s.behavior = Behavior::kLaneKeep;
      } else if (type == "lane_change_left") {
        s.behavior = Behavior::kLaneChangeLeft;
      } else if (type == "lane_change_right") {
        s.behavior = Behavior::kLaneChangeRight;
      } else {
        if (errors) errors->push_back("unknown behavior type: " + type);
        return std::nullopt;
      }
      if (b.contains("complete_by_s")) {
        s.complete_by_s = b["complete_by_s"].get<double>();
      }
    }
    if (j.contains("params")) {
      const auto& p = j["params"];
      PlannerParams& pp = s.params;
      pp.path_length = get_num(p, "path_length", pp.path_length);
      pp.n_segments = static_cast<int>(get_num(p, "n_segments", pp.n_segments));
      pp.interp_count = static_cast<int>(get_num(p, "interp_count", pp.interp_count));
      pp.q_c = get_num(p, "q_c", pp.q_c);
      pp.penalty.alpha = get_num(p, "alpha", pp.penalty.alpha);
      pp.penalty.x_r_collision = get_num(p, "x_r_collision", pp.penalty.x_r_collision);
      pp.penalty.x_r_curvature = get_num(p, "x_r_curvature", pp.penalty.x_r_curvature);
      pp.penalty.sigma_obs = get_num(p, "sigma_obs", pp.penalty.sigma_obs);
      pp.penalty.sigma_cur = get_num(p, "sigma_cur", pp.penalty.sigma_cur);
      pp.boundary_start_noise = get_num(p, "boundary_start_noise", pp.boundary_start_noise);
      pp.boundary_end_noise = get_num(p, "boundary_end_noise", pp.boundary_end_noise);
      pp.complete_by_s = get_num(p, "complete_by_s", pp.complete_by_s);
      pp.esdf_resolution = get_num(p, "esdf_resolution", pp.esdf_resolution);
      pp.esdf_d_extent = get_num(p, "esdf_d_extent", pp.esdf_d_extent);
      pp.search.n_accel = static_cast<int>(get_num(p, "n_accel", pp.search.n_accel));
      pp.search.t_f = get_num(p, "t_f", pp.search.t_f);
      pp.search.n_rounds = static_cast<int>(get_num(p, "n_rounds", pp.search.n_rounds));
      pp.search.t_s = get_num(p, "t_s", pp.search.t_s);
      pp.search.r_g = get_num(p, "r_g", pp.search.r_g);
      pp.speed_weights.w_u = get_num(p, "w_u", pp.speed_weights.w_u);
      pp.speed_weights.w_r = get_num(p, "w_r", pp.speed_weights.w_r);
      pp.speed_weights.w_b = get_num(p, "w_b", pp.speed_weights.w_b);
      pp.smooth_weights.w_acc = get_num(p, "w_acc", pp.smooth_weights.w_acc);
      pp.smooth_weights.w_jerk = get_num(p, "w_jerk", pp.smooth_weights.w_jerk);
      pp.smooth_weights.w_dev = get_num(p, "w_dev", pp.smooth_weights.w_dev);
      pp.lat_acc.sigma_lat = get_num(p, "sigma_lat", pp.lat_acc.sigma_lat);
      pp.lat_acc.x_r_lat = get_num(p, "x_r_lat", pp.lat_acc.x_r_lat);
      pp.lat_acc.bound_margin = get_num(p, "lat_acc_bound_margin", pp.lat_acc.bound_margin);
      pp.lat_acc.sample_dt = get_num(p, "refine_sample_dt", pp.lat_acc.sample_dt);
      pp.lat_acc.max_iterations = static_cast<int>(
          get_num(p, "max_refine_iterations", pp.lat_acc.max_iterations));
    }
  } catch (const std::exception& e) {
    if (errors) errors->push_back(std::string("scenario field error: ") + e.what());
    return std::nullopt;
  }
  return s;
}

std::optional<Scenario> load_scenario(const std::string& path,
                                      std::vector<std::string>* errors) {
  std::ifstream in(path);
  if (!in) {
    if (errors) errors->push_back("cannot open scenario file: " + path);
    return std::nullopt;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), errors);
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> errors;
  if (s.reference_line.size() < 2) {
    errors.push_back("reference_line needs at least 2 waypoints");
  } else {
    double length = 0.0;
    for (std::size_t i = 1; i < s.reference_line.size(); ++i) {
      length += (s.reference_line[i] - s.reference_line[i - 1]).norm();
    }
    if (length < 10.0) errors.push_back("reference_line shorter than 10 m");
  }
  if (s.lane_width <= 0.0) errors.push_back("lane_width must be positive");
  if (s.vehicle.length <= 0.0 || s.vehicle.width <= 0.0) {
    errors.push_back("vehicle footprint must be positive");
  }
  if (s.vehicle.n_circles < 1) errors.push_back("vehicle needs >= 1 circle");
  if (s.vehicle.safety_margin < 0.0) errors.push_back("safety_margin must be >= 0");
  if (s.limits.a_min >= 0.0) errors.push_back("limits.a_min must be negative");
  if (s.limits.a_max <= 0.0) errors.push_back("limits.a_max must be positive");
  if (s.limits.v_road <= 0.0) errors.push_back("limits.v_road must be positive");
  if (s.limits.a_lat_max <= 0.0) errors.push_back("limits.a_lat_max must be positive");
  if (s.kappa_max <= 0.0) errors.push_back("limits.kappa_max must be positive");
  if (s.ego.speed < 0.0) errors.push_back("ego.speed must be >= 0");
  const auto [d_min, d_max] = s.effective_corridor();
  if (d_max - d_min < s.vehicle.width) {
    errors.push_back("corridor narrower than the vehicle");
  }
  if (s.params.n_segments < 1 || s.params.interp_count < 0 ||
      s.params.path_length <= 0.0) {
    errors.push_back("invalid path discretization params");
  }
  if (s.params.search.n_accel < 2 || s.params.search.n_rounds < 1 ||
      s.params.search.t_f <= 0.0 || s.params.search.t_s <= 0.0) {
    errors.push_back("invalid speed search params");
  }
  return errors;
}

}  // namespace gptraj
