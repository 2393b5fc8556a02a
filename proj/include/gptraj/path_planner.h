#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gptraj/block_tridiag.h"
#include "gptraj/esdf.h"
#include "gptraj/frenet.h"
#include "gptraj/gp_prior.h"
#include "gptraj/reference_line.h"

namespace gptraj {

/// Hyperparameters of the constraint likelihoods. x_r is the width of the
/// cubic blending band of the penalty; sigma scales the residual weight
/// (Sigma = sigma * I).
struct PenaltyParams {
  double alpha = 50.0;
  double x_r_collision = 0.5;   // m
  double x_r_curvature = 0.05;  // 1/m
  double sigma_obs = 0.005;
  double sigma_cur = 0.01;
};

/// Three-branch C2 penalty: zero for x >= x_r, cubic in the band
/// [0, x_r], quadratic growth beyond. Value and derivative w.r.t. x.
double penalty(double x, double x_r, double alpha);
double penalty_derivative(double x, double x_r, double alpha);

/// Soft observation of a station's lateral state.
struct StateObservation {
  int station = 0;
  LateralState target;
  Vec3 noise_diag{1e-8, 1e-8, 1e-8};  // R diagonal
};

struct PathProblem {
  GpChain chain;  // stations fixed; states used as solver initialization
  StateObservation boundary_start;
  StateObservation boundary_end;
  std::vector<StateObservation> extra_observations;  // e.g. lane-change commitment

  const ReferenceLine* ref = nullptr;
  const EsdfField* esdf = nullptr;  // null disables collision factors
  VehicleShape vehicle;
  double kappa_max = 0.2;           // <= 0 disables curvature factors
  int interp_count = 10;            // interpolated constraint states per segment
  PenaltyParams penalty;

  // Frenet-projected obstacle polygons; only used by the initializer's side
  // selection, the solver sees them through the ESDF.
  std::vector<std::vector<FrenetPoint>> frenet_obstacles;
};

enum class FactorType { kGpPrior, kObservation, kCollision, kCurvature, kLatAcc };

/// One factor of the chain graph. Segment factors couple stations
/// (station, station + 1); unary factors touch only `station`. Constraint
/// factors at interpolated stations carry the cached interpolation matrices
/// that chain their jacobians onto the two support states.
struct Factor {
  FactorType type = FactorType::kGpPrior;
  int station = 0;
  bool binary = true;

  // kGpPrior
  Mat3 phi = Mat3::Identity();
  Mat3 weight_info = Mat3::Identity();

  // kObservation
  LateralState target;
  Vec3 weight_diag{0.0, 0.0, 0.0};

  // constraint factors
  GpInterpolator interp;  // lambda = I, psi = 0 at support stations
  double s_query = 0.0;
  double kappa_r = 0.0;
  double dkappa_r = 0.0;
  double inv_sigma = 1.0;

  // kLatAcc
  double s_dot = 0.0;
  double s_ddot = 0.0;
  double a_lat_max = 2.5;
  double x_r_lat = 0.25;
};

struct FactorBlocks {
  double cost = 0.0;
  Mat3 h_aa = Mat3::Zero();
  Mat3 h_ab = Mat3::Zero();
  Mat3 h_bb = Mat3::Zero();
  Vec3 g_a = Vec3::Zero();
  Vec3 g_b = Vec3::Zero();
};

struct CostBreakdown {
  double prior = 0.0;
  double observation = 0.0;
  double collision = 0.0;
  double curvature = 0.0;
  double lat_acc = 0.0;
  double total() const {
    return prior + observation + collision + curvature + lat_acc;
  }
};

/// Factor graph over the lateral-state chain. Factors are fixed topology
/// (block-tridiagonal); lat-acc factors may be appended later by the
/// refinement loop.
class PathFactorGraph {
 public:
  PathFactorGraph() = default;
  explicit PathFactorGraph(const PathProblem& problem);

  int num_stations() const { return static_cast<int>(stations_.size()); }
  const std::vector<double>& stations() const { return stations_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const PathProblem* problem() const { return problem_; }

  /// Appends factors; returns the earliest station they touch.
  int add_factors(const std::vector<Factor>& new_factors);

  double cost(const std::vector<LateralState>& states) const;
  CostBreakdown cost_breakdown(const std::vector<LateralState>& states) const;

  FactorBlocks linearize_factor(const Factor& f,
                                const std::vector<LateralState>& states) const;
  double factor_cost(const Factor& f,
                     const std::vector<LateralState>& states) const;

  /// Full assembly of the normal equations at the given linearization point.
  void assemble(const std::vector<LateralState>& states,
                BlockTridiagonal* sys) const;

  const std::vector<int>& factors_touching_a(int station) const {
    return touch_a_[station];
  }
  const std::vector<int>& factors_touching_b(int station) const {
    return touch_b_[station];
  }

 private:
  const PathProblem* problem_ = nullptr;
  std::vector<double> stations_;
  std::vector<Factor> factors_;
  std::vector<std::vector<int>> touch_a_;  // factors whose first station is i
  std::vector<std::vector<int>> touch_b_;  // binary factors whose second station is i

  void register_factor(int index);
};

/// Builds the collision + curvature constraint factor for one evaluation
/// station (support or interpolated); shared with the refinement module.
Factor make_collision_factor(const PathProblem& problem, int segment,
                             double s_query, const GpInterpolator& interp);
Factor make_curvature_factor(const PathProblem& problem, int segment,
                             double s_query, const GpInterpolator& interp);

struct PathDiagnostics {
  int iterations = 0;
  bool converged = false;
  std::string error;
  CostBreakdown cost;
  double wall_ms = 0.0;
  bool init_collision_free = true;
  int init_candidates = 0;
  int singular_station = -1;
};

struct PathSolution {
  GpChain chain;
  PathDiagnostics diag;
};

struct SolveOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-6;
};

/// Levenberg-Marquardt over the chain-sparse system; O(N) per iteration via
/// block Thomas elimination.
PathSolution solve_map(const PathProblem& problem,
                       const std::vector<LateralState>& init,
                       const SolveOptions& options = {});

/// Constraint-free chain solve plus side selection around blocking obstacles.
/// Never fails: when no candidate is collision free the best-cost candidate
/// is returned and the flag records it.
std::vector<LateralState> initialize_path(const PathProblem& problem,
                                          std::optional<int> pass_side_hint,
                                          PathDiagnostics* diag = nullptr);

/// Dense sampling of the optimized path: frenet state, cartesian pose, path
/// curvature, and the cartesian arc length s_path used by speed planning.
struct PathSamplePoint {
  double s_ref = 0.0;
  double s_path = 0.0;
  LateralState lateral;
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  double kappa = 0.0;
};

class SampledPath {
 public:
  SampledPath() = default;
  SampledPath(const GpChain& chain, const ReferenceLine& ref,
              double step = 0.25);

  const std::vector<PathSamplePoint>& samples() const { return samples_; }
  double length() const {
    return samples_.empty() ? 0.0 : samples_.back().s_path;
  }
  /// Monotone map from cartesian arc length to reference arc length.
  double ref_s_at(double s_path) const;
  /// |kappa_p| at a cartesian arc length (clamped to the path domain).
  double abs_kappa_at(double s_path) const;
  /// Exact re-evaluation at a cartesian arc length: chain interpolation at
  /// the mapped reference station. s_path beyond the end holds the end state.
  PathSamplePoint state_at(double s_path) const;

  const GpChain& chain() const { return chain_; }

 private:
  GpChain chain_;
  const ReferenceLine* ref_ = nullptr;
  std::vector<PathSamplePoint> samples_;
};

}  // namespace gptraj
