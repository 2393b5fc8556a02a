#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gptraj/frenet.h"
#include "gptraj/path_planner.h"
#include "gptraj/refinement.h"
#include "gptraj/speed_planner.h"
#include "gptraj/types.h"

namespace gptraj {

enum class Behavior { kLaneKeep, kLaneChangeLeft, kLaneChangeRight };

struct EgoStart {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 8.0;
  double accel = 0.0;
};

struct VehicleSpec {
  double length = 4.6;
  double width = 1.8;
  int n_circles = 3;
  double safety_margin = 0.1;
  double ref_offset = 0.0;  // V relative to the geometric center, forward +
};

struct AgentSpec {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double length = 4.5;
  double width = 2.0;
};

/// Planner tunables; every knob can be overridden from the
/// scenario file's "params" object.
struct PlannerParams {
  // path
  double path_length = 100.0;
  int n_segments = 20;
  int interp_count = 10;
  double q_c = 1.0;
  PenaltyParams penalty;
  double boundary_start_noise = 1e-8;
  double boundary_end_noise = 1e-4;
  double complete_by_s = 30.0;  // lane-change commitment station
  // esdf
  double esdf_resolution = 0.1;
  double esdf_d_extent = 8.0;
  // speed
  SearchParams search;
  SpeedWeights speed_weights;
  SmoothWeights smooth_weights;
  // refinement
  LatAccParams lat_acc;
};

struct Scenario {
  std::vector<Vec2> reference_line;
  double lane_width = 3.5;
  std::optional<std::pair<double, double>> corridor;  // [d_min, d_max]
  EgoStart ego;
  VehicleSpec vehicle;
  std::vector<std::vector<Vec2>> static_obstacles;  // cartesian polygons
  std::vector<AgentSpec> agents;
  SpeedLimits limits;
  double kappa_max = 0.2;
  Behavior behavior = Behavior::kLaneKeep;
  std::optional<double> complete_by_s;
  PlannerParams params;

  /// Effective lateral corridor [d_min, d_max] around the reference line.
  std::pair<double, double> effective_corridor() const;
  double behavior_target_offset() const;
};

/// Parses a scenario from JSON text. Collects human-readable problems into
/// `errors`; returns nullopt when the input is unusable.
std::optional<Scenario> parse_scenario(const std::string& json_text,
                                       std::vector<std::string>* errors);

std::optional<Scenario> load_scenario(const std::string& path,
                                      std::vector<std::string>* errors);

/// Schema/invariant check of an already-parsed scenario.
std::vector<std::string> validate_scenario(const Scenario& scenario);

}  // namespace gptraj
