#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gptraj/scenario.h"

namespace gptraj {

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double kappa = 0.0;
  double v = 0.0;
  double a_long = 0.0;
  double a_lat = 0.0;
  double s_path = 0.0;
  double s_ref = 0.0;
  double d = 0.0;
};

struct StageTiming {
  double esdf_ms = 0.0;
  double path_ms = 0.0;
  double speed_ms = 0.0;
  double refine_ms = 0.0;
  double total_ms = 0.0;
};

struct PlanOptions {
  bool incremental = true;
  double sample_dt = 0.02;
};

struct PlanResult {
  bool success = false;
  std::string failure_stage;  // empty unless a stage failed hard
  std::string error;

  bool collision_free = false;
  bool curvature_ok = false;
  bool refine_feasible = false;
  bool search_fallback = false;  // speed search infeasible, braked instead
  double min_clearance = 0.0;
  double max_abs_kappa = 0.0;
  double max_abs_a_lat = 0.0;

  std::vector<TrajectorySample> trajectory;
  PathDiagnostics path_diag;
  SmoothDiagnostics smooth_diag;
  std::vector<RefineIteration> refine_log;
  int refine_iterations = 0;
  StageTiming timing;

  // Debug payloads for rendering and dumps.
  std::vector<PathSamplePoint> path_samples;
  std::vector<BlockedRegion> regions;
  std::vector<StNode> explored_nodes;
  std::vector<StNode> coarse_chain;
  StProfile profile;
  std::vector<std::vector<FrenetPoint>> frenet_obstacles;
  double corridor_d_min = 0.0;
  double corridor_d_max = 0.0;
  double chain_start_s = 0.0;
  std::shared_ptr<const EsdfField> esdf;
};

/// Full planning cycle: obstacle projection, ESDF, path MAP solve, s-t
/// search + smoothing, incremental refinement, trajectory fusion.
PlanResult plan_scenario(const Scenario& scenario,
                         const PlanOptions& options = {});

}  // namespace gptraj
