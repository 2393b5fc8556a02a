#include "gptraj/render.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace gptraj {

namespace {

std::string fmt(double v, int decimals = 2) {
  char buf[40];
  if (!std::isfinite(v)) v = 0.0;
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

struct Box {
  double x_min = 1e18, x_max = -1e18, y_min = 1e18, y_max = -1e18;
  void add(double x, double y) {
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
  bool empty() const { return x_min > x_max; }
};

// Maps world coordinates into an SVG viewport (y flipped).
struct Viewport {
  Box world;
  double width, height, margin;
  double scale = 1.0;

  Viewport(Box box, double w, double h, double m)
      : world(box), width(w), height(h), margin(m) {
    if (world.empty()) world.add(0, 0), world.add(1, 1);
    const double sx = (width - 2 * margin) / std::max(world.x_max - world.x_min, 1e-6);
    const double sy = (height - 2 * margin) / std::max(world.y_max - world.y_min, 1e-6);
    scale = std::min(sx, sy);
  }
  double x(double wx) const { return margin + (wx - world.x_min) * scale; }
  double y(double wy) const { return height - margin - (wy - world.y_min) * scale; }
};

void polyline(std::ostringstream& svg, const Viewport& vp,
              const std::vector<std::pair<double, double>>& pts,
              const char* style) {
  if (pts.empty()) return;
  svg << "<polyline fill=\"none\" " << style << " points=\"";
  for (const auto& [px, py] : pts) {
    svg << fmt(vp.x(px)) << "," << fmt(vp.y(py)) << " ";
  }
  svg << "\"/>\n";
}

void axes(std::ostringstream& svg, const Viewport& vp, const char* x_label,
          const char* y_label) {
  svg << "<line x1=\"" << fmt(vp.margin) << "\" y1=\"" << fmt(vp.height - vp.margin)
      << "\" x2=\"" << fmt(vp.width - vp.margin) << "\" y2=\""
      << fmt(vp.height - vp.margin) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(vp.margin) << "\" y1=\"" << fmt(vp.height - vp.margin)
      << "\" x2=\"" << fmt(vp.margin) << "\" y2=\"" << fmt(vp.margin)
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << fmt(vp.width - vp.margin) << "\" y=\""
      << fmt(vp.height - vp.margin + 16) << "\" font-size=\"12\">" << x_label
      << "</text>\n";
  svg << "<text x=\"" << fmt(vp.margin - 14) << "\" y=\"" << fmt(vp.margin - 6)
      << "\" font-size=\"12\">" << y_label << "</text>\n";
}

}  // namespace

std::string render_plan_svg(const PlanResult& result, const Scenario& scenario) {
  Box box;
  for (const Vec2& p : scenario.reference_line) box.add(p.x(), p.y());
  for (const auto& poly : scenario.static_obstacles) {
    for (const Vec2& p : poly) box.add(p.x(), p.y());
  }
  for (const auto& s : result.trajectory) box.add(s.x, s.y);
  Viewport vp(box, 900, 420, 30);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"420\">\n";
  svg << "<rect width=\"900\" height=\"420\" fill=\"white\"/>\n";

  std::vector<std::pair<double, double>> ref_pts;
  for (const Vec2& p : scenario.reference_line) ref_pts.emplace_back(p.x(), p.y());
  polyline(svg, vp, ref_pts, "stroke=\"#bbbbbb\" stroke-dasharray=\"6,4\"");

  for (const auto& poly : scenario.static_obstacles) {
    svg << "<polygon fill=\"#555555\" points=\"";
    for (const Vec2& p : poly) {
      svg << fmt(vp.x(p.x())) << "," << fmt(vp.y(p.y())) << " ";
    }
    svg << "\"/>\n";
  }
  for (const auto& agent : scenario.agents) {
    const double c = std::cos(agent.heading);
    const double s = std::sin(agent.heading);
    const double hl = 0.5 * agent.length;
    const double hw = 0.5 * agent.width;
    svg << "<polygon fill=\"none\" stroke=\"#cc8800\" points=\"";
    const double corners[4][2] = {{hl, hw}, {hl, -hw}, {-hl, -hw}, {-hl, hw}};
    for (const auto& corner : corners) {
      const double wx = agent.x + c * corner[0] - s * corner[1];
      const double wy = agent.y + s * corner[0] + c * corner[1];
      svg << fmt(vp.x(wx)) << "," << fmt(vp.y(wy)) << " ";
    }
    svg << "\"/>\n";
    svg << "<line stroke=\"#cc8800\" x1=\"" << fmt(vp.x(agent.x)) << "\" y1=\""
        << fmt(vp.y(agent.y)) << "\" x2=\"" << fmt(vp.x(agent.x + agent.vx))
        << "\" y2=\"" << fmt(vp.y(agent.y + agent.vy)) << "\"/>\n";
  }

  std::vector<std::pair<double, double>> path_pts;
  for (const auto& p : result.path_samples) {
    path_pts.emplace_back(p.position.x(), p.position.y());
  }
  polyline(svg, vp, path_pts, "stroke=\"#4477cc\" stroke-width=\"1\"");

  std::vector<std::pair<double, double>> traj_pts;
  for (const auto& s : result.trajectory) traj_pts.emplace_back(s.x, s.y);
  polyline(svg, vp, traj_pts, "stroke=\"#cc2222\" stroke-width=\"2\"");

  if (!result.trajectory.empty()) {
    svg << "<circle r=\"4\" fill=\"#cc2222\" cx=\""
        << fmt(vp.x(result.trajectory.front().x)) << "\" cy=\""
        << fmt(vp.y(result.trajectory.front().y)) << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_st_svg(const PlanResult& result) {
  Box box;
  box.add(0.0, 0.0);
  double horizon = result.profile.horizon();
  if (horizon <= 0.0) horizon = 8.0;
  box.add(horizon, 1.0);
  for (const auto& node : result.explored_nodes) box.add(node.t, node.s);
  for (const auto& region : result.regions) {
    for (std::size_t k = 0; k < region.slices.size(); ++k) {
      if (!region.slices[k].valid()) continue;
      box.add(region.t0 + k * region.dt, region.slices[k].s_low);
      box.add(region.t0 + k * region.dt, region.slices[k].s_high);
    }
  }
  Viewport vp(box, 640, 420, 36);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\">\n";
  svg << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  axes(svg, vp, "t", "s");

  for (const auto& region : result.regions) {
    for (std::size_t k = 0; k < region.slices.size(); ++k) {
      if (!region.slices[k].valid()) continue;
      const double t = region.t0 + k * region.dt;
      const double x0 = vp.x(t - 0.5 * region.dt);
      const double x1 = vp.x(t + 0.5 * region.dt);
      const double y0 = vp.y(region.slices[k].s_high);
      const double y1 = vp.y(region.slices[k].s_low);
      svg << "<rect fill=\"#7799ee\" fill-opacity=\"0.6\" x=\"" << fmt(x0)
          << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0)
          << "\" height=\"" << fmt(y1 - y0) << "\"/>\n";
    }
  }

  // Explored expansion edges.
  for (const auto& node : result.explored_nodes) {
    if (node.parent < 0 ||
        node.parent >= static_cast<int>(result.explored_nodes.size())) {
      continue;
    }
    const auto& p = result.explored_nodes[node.parent];
    svg << "<line stroke=\"#bbbbbb\" stroke-width=\"0.5\" x1=\"" << fmt(vp.x(p.t))
        << "\" y1=\"" << fmt(vp.y(p.s)) << "\" x2=\"" << fmt(vp.x(node.t))
        << "\" y2=\"" << fmt(vp.y(node.s)) << "\"/>\n";
  }

  std::vector<std::pair<double, double>> coarse_pts;
  for (const auto& node : result.coarse_chain) coarse_pts.emplace_back(node.t, node.s);
  polyline(svg, vp, coarse_pts, "stroke=\"#cc2222\" stroke-width=\"2\"");

  if (!result.profile.segments.empty()) {
    std::vector<std::pair<double, double>> prof_pts;
    for (double t = 0.0; t <= result.profile.horizon() + 1e-9; t += 0.05) {
      prof_pts.emplace_back(t, result.profile.s_at(t));
    }
    polyline(svg, vp, prof_pts, "stroke=\"#118833\" stroke-width=\"1.5\"");
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_alat_svg(const PlanResult& result, double a_lat_max) {
  Box box;
  box.add(0.0, -a_lat_max * 1.2);
  double horizon = result.profile.horizon();
  if (horizon <= 0.0) horizon = 8.0;
  box.add(horizon, a_lat_max * 1.2);
  for (const auto& entry : result.refine_log) {
    for (const auto& [t, a] : entry.a_lat_samples) box.add(t, a);
  }
  Viewport vp(box, 640, 300, 36);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"300\">\n";
  svg << "<rect width=\"640\" height=\"300\" fill=\"white\"/>\n";
  axes(svg, vp, "t", "a_lat");
  for (double bound : {a_lat_max, -a_lat_max}) {
    svg << "<line stroke=\"#cc2222\" stroke-dasharray=\"5,4\" x1=\""
        << fmt(vp.x(box.x_min)) << "\" y1=\"" << fmt(vp.y(bound)) << "\" x2=\""
        << fmt(vp.x(box.x_max)) << "\" y2=\"" << fmt(vp.y(bound)) << "\"/>\n";
  }

  static const char* kColors[] = {"#999999", "#7788cc", "#55aa66",
                                  "#cc8844", "#aa55aa", "#338888"};
  for (std::size_t i = 0; i < result.refine_log.size(); ++i) {
    std::vector<std::pair<double, double>> pts(
        result.refine_log[i].a_lat_samples.begin(),
        result.refine_log[i].a_lat_samples.end());
    std::string style = std::string("stroke=\"") + kColors[i % 6] +
                        "\" stroke-width=\"" +
                        (i + 1 == result.refine_log.size() ? "2" : "1") + "\"";
    polyline(svg, vp, pts, style.c_str());
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string result_to_json(const PlanResult& result) {
  nlohmann::ordered_json j;
  j["success"] = result.success;
  j["failure_stage"] = result.failure_stage;
  j["error"] = result.error;

  nlohmann::ordered_json checks;
  checks["collision_free"] = result.collision_free;
  checks["curvature_ok"] = result.curvature_ok;
  checks["refine_feasible"] = result.refine_feasible;
  checks["search_fallback"] = result.search_fallback;
  checks["min_clearance"] = result.min_clearance;
  checks["max_abs_kappa"] = result.max_abs_kappa;
  checks["max_abs_a_lat"] = result.max_abs_a_lat;
  j["checks"] = checks;

  nlohmann::ordered_json path;
  path["iterations"] = result.path_diag.iterations;
  path["converged"] = result.path_diag.converged;
  path["init_candidates"] = result.path_diag.init_candidates;
  path["init_collision_free"] = result.path_diag.init_collision_free;
  nlohmann::ordered_json cost;
  cost["prior"] = result.path_diag.cost.prior;
  cost["observation"] = result.path_diag.cost.observation;
  cost["collision"] = result.path_diag.cost.collision;
  cost["curvature"] = result.path_diag.cost.curvature;
  cost["lat_acc"] = result.path_diag.cost.lat_acc;
  path["cost"] = cost;
  j["path"] = path;

  nlohmann::ordered_json smooth;
  smooth["feasible"] = result.smooth_diag.feasible;
  smooth["relaxed"] = result.smooth_diag.relaxed;
  j["smooth"] = smooth;

  nlohmann::ordered_json refine;
  refine["iterations"] = result.refine_iterations;
  refine["feasible"] = result.refine_feasible;
  nlohmann::ordered_json log = nlohmann::ordered_json::array();
  for (const auto& entry : result.refine_log) {
    nlohmann::ordered_json e;
    e["iteration"] = entry.iteration;
    e["max_abs_a_lat"] = entry.max_abs_a_lat;
    e["factors_added"] = entry.factors_added;
    e["stations_reeliminated"] = entry.stations_reeliminated;
    log.push_back(e);
  }
  refine["log"] = log;
  j["refine"] = refine;

  nlohmann::ordered_json st;
  nlohmann::ordered_json regions = nlohmann::ordered_json::array();
  for (const auto& region : result.regions) {
    nlohmann::ordered_json r;
    r["t0"] = region.t0;
    r["dt"] = region.dt;
    nlohmann::ordered_json slices = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < region.slices.size(); ++k) {
      if (!region.slices[k].valid()) continue;
      slices.push_back({k, region.slices[k].s_low, region.slices[k].s_high});
    }
    r["slices"] = slices;
    regions.push_back(r);
  }
  st["regions"] = regions;
  nlohmann::ordered_json explored = nlohmann::ordered_json::array();
  for (const auto& node : result.explored_nodes) {
    explored.push_back({node.t, node.s, node.s_dot, node.cost, node.parent});
  }
  st["explored"] = explored;
  nlohmann::ordered_json coarse = nlohmann::ordered_json::array();
  for (const auto& node : result.coarse_chain) {
    coarse.push_back({node.t, node.s, node.s_dot});
  }
  st["coarse"] = coarse;
  j["st_graph"] = st;

  nlohmann::ordered_json traj = nlohmann::ordered_json::array();
  for (const auto& s : result.trajectory) {
    traj.push_back({s.t, s.x, s.y, s.heading, s.kappa, s.v, s.a_long, s.a_lat,
                    s.s_path, s.s_ref, s.d});
  }
  j["trajectory_columns"] = {"t", "x", "y", "heading", "kappa", "v",
                             "a_long", "a_lat", "s_path", "s_ref", "d"};
  j["trajectory"] = traj;
  return j.dump(1);
}

std::string timing_to_json(const PlanResult& result) {
  nlohmann::ordered_json j;
  j["esdf_ms"] = result.timing.esdf_ms;
  j["path_ms"] = result.timing.path_ms;
  j["speed_ms"] = result.timing.speed_ms;
  j["refine_ms"] = result.timing.refine_ms;
  j["total_ms"] = result.timing.total_ms;
  nlohmann::ordered_json iters = nlohmann::ordered_json::array();
  for (const auto& entry : result.refine_log) {
    nlohmann::ordered_json e;
    e["iteration"] = entry.iteration;
    e["path_update_ms"] = entry.path_update_ms;
    e["speed_replan_ms"] = entry.speed_replan_ms;
    iters.push_back(e);
  }
  j["refine_iterations"] = iters;
  return j.dump(1);
}

}  // namespace gptraj
