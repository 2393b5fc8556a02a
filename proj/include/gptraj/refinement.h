#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gptraj/block_tridiag.h"
#include "gptraj/path_planner.h"
#include "gptraj/speed_planner.h"

namespace gptraj {

struct LatAccParams {
  double a_lat_max = 2.5;   // m/s^2
  double sigma_lat = 0.01;
  double x_r_lat = 0.25;    // cubic band width of the hinge
  // The factor pushes toward a slightly tighter internal bound so the soft
  // C2 hinge's equilibrium still lands strictly inside the true limit.
  double bound_margin = 0.97;
  // Violation sampling interval. At highway speeds 0.1 s steps are ~2 m apart
  // and the chain rebounds between fixed sample stations; 0.05 s keeps the
  // factor grid denser than the rebound width.
  double sample_dt = 0.05;
  int max_iterations = 10;
  double update_threshold = 1e-8;  // relinearization trigger per state
  bool incremental = true;
};

/// a_lat = d'' * s_dot^2 + d' * s_ddot, estimated with the speed profile of
/// the previous iteration.
double lateral_acceleration(const LateralState& state, double s_dot,
                            double s_ddot);

/// Hinge factor bounding |a_lat| at one (interpolated) station; s_dot and
/// s_ddot are constants from the previous speed profile.
Factor make_lat_acc_factor(const GpChain& chain, double s_query, double s_dot,
                           double s_ddot, const LatAccParams& params);

/// Gauss-Newton solver over the chain graph that stores the forward
/// elimination (first station to last). Adding factors re-eliminates only the
/// suffix from the earliest touched station; the nonlinear outer loop
/// relinearizes only factors whose stations moved beyond the threshold, so
/// untouched prefixes keep bit-identical linearization points.
class IncrementalChainSolver {
 public:
  IncrementalChainSolver(PathFactorGraph* graph,
                         std::vector<LateralState> states, bool incremental);

  struct UpdateStats {
    int first_pass_stations = 0;  // suffix length of the linear update
    int total_eliminations = 0;   // summed over outer iterations
    int outer_iterations = 0;
    double final_cost = 0.0;
  };

  /// Appends the factors and re-solves. With an empty list this is a no-op
  /// (zero stations re-eliminated, states untouched).
  UpdateStats add_factors_and_update(const std::vector<Factor>& new_factors);

  const std::vector<LateralState>& states() const { return states_; }
  const ChainElimination& elimination() const { return elim_; }
  const BlockTridiagonal& system() const { return sys_; }

 private:
  PathFactorGraph* graph_;
  std::vector<LateralState> states_;
  bool incremental_;
  std::vector<FactorBlocks> blocks_;
  std::vector<double> factor_costs_;
  double total_cost_ = 0.0;
  BlockTridiagonal sys_;
  ChainElimination elim_;

  void relinearize_factor(int index);
  void rebuild_stations(int from);
};

struct RefineIteration {
  int iteration = 0;
  double max_abs_a_lat = 0.0;
  int factors_added = 0;
  int stations_reeliminated = 0;
  double path_update_ms = 0.0;
  double speed_replan_ms = 0.0;
  std::vector<std::pair<double, double>> a_lat_samples;  // (t, a_lat)
};

struct RefineResult {
  std::vector<LateralState> states;
  StProfile profile;
  bool feasible = false;
  int iterations = 0;
  std::vector<RefineIteration> log;
  std::string error;
};

/// Re-plans the speed profile for an updated path; throws on hard failure.
using SpeedReplanFn = std::function<StProfile(const SampledPath&)>;

/// Iterative incremental refinement: sample the fused trajectory, add a
/// lateral-acceleration factor per violating sample, update the path through
/// the chain solver, regenerate the speed profile, repeat until clean or
/// max_iterations.
RefineResult refine(PathFactorGraph& graph,
                    const std::vector<LateralState>& initial_states,
                    const ReferenceLine& ref, const StProfile& initial_profile,
                    const LatAccParams& params, const SpeedReplanFn& replan);

}  // namespace gptraj
