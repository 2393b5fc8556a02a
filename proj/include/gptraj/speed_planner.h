#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gptraj/path_planner.h"
#include "gptraj/types.h"

namespace gptraj {

struct SpeedLimits {
  double a_min = -4.0;  // m/s^2
  double a_max = 2.0;   // m/s^2
  double v_road = 15.0;
  double a_lat_max = 2.5;
  // The curvature speed cap uses the path curvature kappa_p, while the
  // refinement bounds d'' s_dot^2 which is (1 + d'^2)^(3/2) larger; the cap
  // runs at a scaled budget so saturating it cannot lock in a violation.
  double a_lat_cap_scale = 0.94;

  double capped_speed(double abs_kappa) const {
    return std::min(v_road, std::sqrt(a_lat_cap_scale * a_lat_max /
                                      std::max(abs_kappa, 1e-9)));
  }
};

struct SpeedWeights {
  double w_u = 0.1;  // control effort
  double w_r = 1.0;  // reference-speed deviation
  double w_b = 2.0;  // blocked-region proximity
};

struct SearchParams {
  int n_accel = 13;
  double t_f = 1.0;  // expansion interval
  int n_rounds = 8;
  double t_s = 0.2;  // slice / projection interval
  double r_g = 0.5;  // truncation radius
  bool truncation = true;
};

/// Blocked (t, s) region of one agent, stored as per-time-slice intervals.
struct BlockedRegion {
  double t0 = 0.0;
  double dt = 0.2;
  struct Slice {
    double s_low = 0.0;
    double s_high = -1.0;
    bool valid() const { return s_high >= s_low; }
  };
  std::vector<Slice> slices;

  int slice_index(double t) const {
    return static_cast<int>(std::lround((t - t0) / dt));
  }
  bool has_slice(int k) const {
    return k >= 0 && k < static_cast<int>(slices.size()) && slices[k].valid();
  }
  bool blocked(double t, double s) const {
    const int k = slice_index(t);
    return has_slice(k) && s >= slices[k].s_low && s <= slices[k].s_high;
  }
  /// Longitudinal distance from s to the interval at time t; +inf when the
  /// region has no slice there, 0 inside.
  double gap_at(double t, double s) const;
};

/// Constant-velocity agent prediction with a rectangular footprint.
struct AgentPrediction {
  Vec2 position{0.0, 0.0};  // footprint center at t = 0
  Vec2 velocity{0.0, 0.0};
  double heading = 0.0;
  double length = 4.5;
  double width = 2.0;

  Vec2 position_at(double t) const { return position + t * velocity; }
};

/// Marks the (t, s) cells where an agent footprint overlaps the swept path
/// corridor (path inflated by half the ego width); the overlapping arc-length
/// interval is inflated by half the ego length.
std::vector<BlockedRegion> project_trajectories(
    const std::vector<PathSamplePoint>& path_samples,
    const std::vector<AgentPrediction>& agents, double horizon, double t_s,
    double ego_length, double ego_width);

struct StNode {
  double t = 0.0;
  double s = 0.0;
  double s_dot = 0.0;
  double cost = 0.0;
  int parent = -1;
  double a_applied = 0.0;
};

/// Constant-acceleration expansion over t_f; a child that would reach
/// negative speed stops at the stopping point and holds.
StNode expand(const StNode& node, double a, double t_f);

/// Greedy 1D clustering by s (ascending scan, new cluster when the gap to the
/// previous child exceeds r_g); keeps the min-cost node per cluster, ties
/// broken toward higher speed.
std::vector<StNode> local_truncation(const std::vector<StNode>& children,
                                     double r_g);

struct SearchResult {
  bool feasible = false;
  std::vector<StNode> chain;  // chronological, chain.front() = initial node
  int expanded = 0;
  int kept = 0;
  std::vector<StNode> explored;  // every surviving node, for debug output
};

/// Forward s-t graph search (projection, expansion, truncation). ref_speed
/// maps a path position to the desired speed there.
SearchResult search_speed_profile(
    const Vec3& initial_state,  // [s, s_dot, s_ddot]
    const std::vector<BlockedRegion>& regions, const SpeedLimits& limits,
    const SpeedWeights& weights, const SearchParams& params,
    const std::function<double(double)>& ref_speed);

/// Piecewise quintic Bezier speed profile s(t).
struct BezierSegment {
  double t0 = 0.0;
  double duration = 1.0;
  std::array<double, 6> ctrl{};

  double value(double t) const;
  double deriv(double t) const;
  double accel(double t) const;
};

struct StProfile {
  std::vector<BezierSegment> segments;

  double horizon() const {
    return segments.empty() ? 0.0
                            : segments.back().t0 + segments.back().duration;
  }
  double s_at(double t) const;
  double v_at(double t) const;
  double a_at(double t) const;

  /// First time s(t) reaches the given arc length (+horizon when never).
  double time_at_s(double s) const;
};

struct SmoothDiagnostics {
  bool feasible = false;
  bool relaxed = false;
  int qp_iterations = 0;
  std::string error;
};

struct SmoothWeights {
  double w_acc = 1.0;
  double w_jerk = 0.5;
  double w_dev = 5.0;
};

/// QP smoothing of a coarse chain: piecewise quintic Bezier with C2 joints,
/// initial-state equality, convex-hull corridor bounds from the blocked
/// regions around the coarse solution, speed caps from the road limit and the
/// lateral-acceleration formula (floored by the braking envelope so the
/// initial speed stays feasible), and acceleration bounds.
StProfile smooth_profile(const std::vector<StNode>& coarse,
                         const std::vector<BlockedRegion>& regions,
                         const SpeedLimits& limits, const SearchParams& params,
                         const std::function<double(double)>& abs_kappa,
                         const Vec3& initial_state,
                         SmoothDiagnostics* diag = nullptr,
                         const SmoothWeights& weights = {});

/// Fallback profile when the search is infeasible: maximum braking to a stop.
StProfile max_braking_profile(const Vec3& initial_state,
                              const SpeedLimits& limits,
                              const SearchParams& params);

}  // namespace gptraj
