#include "gptraj/path_planner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace gptraj {

namespace {

// Saturation guard for evaluations approaching the curvature center: clamp
// the state onto 1 - kappa_r * d = kGuardW and stop the jacobian there.
constexpr double kGuardW = 0.1;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct GuardedState {
  LateralState state;
  bool saturated = false;
};

GuardedState guard_state(const LateralState& in, double kappa_r) {
  GuardedState out{in, false};
  const double w = 1.0 - kappa_r * in.d;
  if (w <= kGuardW) {
    out.state.d = (1.0 - kGuardW) / kappa_r;
    out.saturated = true;
  }
  return out;
}

}  // namespace

double penalty(double x, double x_r, double alpha) {
  const double xb = x_r - x;
  if (xb <= 0.0) return 0.0;
  if (xb <= x_r) return alpha * xb * xb * xb;
  return alpha * (3.0 * x_r * xb * xb - 3.0 * x_r * x_r * xb + x_r * x_r * x_r);
}

double penalty_derivative(double x, double x_r, double alpha) {
  const double xb = x_r - x;
  if (xb <= 0.0) return 0.0;
  if (xb <= x_r) return -3.0 * alpha * xb * xb;
  return -alpha * (6.0 * x_r * xb - 3.0 * x_r * x_r);
}

Factor make_collision_factor(const PathProblem& problem, int segment,
                             double s_query, const GpInterpolator& interp) {
  Factor f;
  f.type = FactorType::kCollision;
  f.station = segment;
  f.binary = true;
  f.interp = interp;
  f.s_query = s_query;
  f.kappa_r = problem.ref ? problem.ref->kappa_at(s_query) : 0.0;
  f.dkappa_r = problem.ref ? problem.ref->dkappa_at(s_query) : 0.0;
  f.inv_sigma = 1.0 / problem.penalty.sigma_obs;
  return f;
}

Factor make_curvature_factor(const PathProblem& problem, int segment,
                             double s_query, const GpInterpolator& interp) {
  Factor f = make_collision_factor(problem, segment, s_query, interp);
  f.type = FactorType::kCurvature;
  f.inv_sigma = 1.0 / problem.penalty.sigma_cur;
  return f;
}

PathFactorGraph::PathFactorGraph(const PathProblem& problem)
    : problem_(&problem), stations_(problem.chain.stations) {
  const int n = num_stations();
  if (n < 2) throw std::invalid_argument("chain needs at least 2 stations");
  touch_a_.resize(n);
  touch_b_.resize(n);

  // Motion prior per segment.
  for (int i = 0; i + 1 < n; ++i) {
    const double ds = stations_[i + 1] - stations_[i];
    Factor f;
    f.type = FactorType::kGpPrior;
    f.station = i;
    f.binary = true;
    f.phi = state_transition(ds);
    f.weight_info = process_noise_inverse(ds, problem.chain.q_c);
    factors_.push_back(f);
  }

  auto add_observation = [&](const StateObservation& obs) {
    Factor f;
    f.type = FactorType::kObservation;
    f.station = obs.station;
    f.binary = false;
    f.target = obs.target;
    for (int k = 0; k < 3; ++k) f.weight_diag[k] = 1.0 / obs.noise_diag[k];
    factors_.push_back(f);
  };
  add_observation(problem.boundary_start);
  add_observation(problem.boundary_end);
  for (const auto& obs : problem.extra_observations) add_observation(obs);

  // Collision / curvature likelihoods at support and interpolated stations.
  const bool with_collision = problem.esdf != nullptr;
  const bool with_curvature = problem.kappa_max > 0.0;
  if (with_collision || with_curvature) {
    GpInterpolator support_first;
    support_first.lambda = Mat3::Identity();
    support_first.psi = Mat3::Zero();
    GpInterpolator support_second;
    support_second.lambda = Mat3::Zero();
    support_second.psi = Mat3::Identity();

    for (int i = 0; i + 1 < n; ++i) {
      const double s_i = stations_[i];
      const double s_next = stations_[i + 1];
      auto add_constraints = [&](double s_query, const GpInterpolator& interp) {
        if (with_collision)
          factors_.push_back(make_collision_factor(problem, i, s_query, interp));
        if (with_curvature)
          factors_.push_back(make_curvature_factor(problem, i, s_query, interp));
      };
      add_constraints(s_i, support_first);
      for (int k = 1; k <= problem.interp_count; ++k) {
        const double s_query =
            s_i + (s_next - s_i) * static_cast<double>(k) /
                      static_cast<double>(problem.interp_count + 1);
        add_constraints(s_query,
                        gp_interpolation_matrices(s_i, s_next, s_query));
      }
      if (i + 2 == n) add_constraints(s_next, support_second);
    }
  }

  for (int idx = 0; idx < static_cast<int>(factors_.size()); ++idx) {
    register_factor(idx);
  }
}

void PathFactorGraph::register_factor(int index) {
  const Factor& f = factors_[index];
  touch_a_[f.station].push_back(index);
  if (f.binary) touch_b_[f.station + 1].push_back(index);
}

int PathFactorGraph::add_factors(const std::vector<Factor>& new_factors) {
  int earliest = num_stations();
  for (const Factor& f : new_factors) {
    factors_.push_back(f);
    register_factor(static_cast<int>(factors_.size()) - 1);
    earliest = std::min(earliest, f.station);
  }
  return earliest;
}

FactorBlocks PathFactorGraph::linearize_factor(
    const Factor& f, const std::vector<LateralState>& states) const {
  FactorBlocks out;
  const Vec3 xa = states[f.station].vec();

  switch (f.type) {
    case FactorType::kGpPrior: {
      const Vec3 xb = states[f.station + 1].vec();
      const Vec3 r = f.phi * xa - xb;
      const Mat3& w = f.weight_info;
      out.cost = 0.5 * r.dot(w * r);
      out.h_aa = f.phi.transpose() * w * f.phi;
      out.h_ab = -f.phi.transpose() * w;
      out.h_bb = w;
      out.g_a = f.phi.transpose() * (w * r);
      out.g_b = -(w * r);
      return out;
    }
    case FactorType::kObservation: {
      const Vec3 r = xa - f.target.vec();
      const Vec3 wr = f.weight_diag.cwiseProduct(r);
      out.cost = 0.5 * r.dot(wr);
      out.h_aa = f.weight_diag.asDiagonal();
      out.g_a = wr;
      return out;
    }
    default:
      break;
  }

  // Constraint factor at a (possibly interpolated) station.
  const Vec3 xb = states[f.station + 1].vec();
  const LateralState raw(f.interp.lambda * xa + f.interp.psi * xb);
  const auto [state, saturated] = guard_state(raw, f.kappa_r);
  const PenaltyParams& pp = problem_->penalty;

  if (f.type == FactorType::kCollision) {
    const double theta =
        std::atan2(state.d_prime, 1.0 - f.kappa_r * state.d);
    const FrenetPoint v{f.s_query, state.d};
    const VehicleShape& shape = problem_->vehicle;
    const double clearance = shape.clearance_required();
    const double x_r = pp.x_r_collision;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    for (double l : shape.circle_offsets) {
      const FrenetPoint center{v.s + l * cos_t, v.d + l * sin_t};
      const EsdfQuery q = problem_->esdf->query(center);
      const double x = q.distance - clearance + x_r;
      const double r = penalty(x, x_r, pp.alpha);
      out.cost += 0.5 * f.inv_sigma * r * r;
      if (r == 0.0 || saturated) continue;
      const double dpen = penalty_derivative(x, x_r, pp.alpha);
      const Eigen::Matrix2d cj = circle_center_jacobian(
          theta, l, state.d, state.d_prime, f.kappa_r);
      const Eigen::RowVector2d dr_dc =
          dpen * Eigen::RowVector2d(q.gradient[0], q.gradient[1]);
      const Eigen::RowVector2d dr_dx = dr_dc * cj;
      Eigen::RowVector3d jrow(dr_dx[0], dr_dx[1], 0.0);
      const Eigen::RowVector3d ja = jrow * f.interp.lambda;
      const Eigen::RowVector3d jb = jrow * f.interp.psi;
      out.h_aa += f.inv_sigma * ja.transpose() * ja;
      out.h_ab += f.inv_sigma * ja.transpose() * jb;
      out.h_bb += f.inv_sigma * jb.transpose() * jb;
      out.g_a += f.inv_sigma * ja.transpose() * r;
      out.g_b += f.inv_sigma * jb.transpose() * r;
    }
    return out;
  }

  double value = 0.0;
  double bound = 0.0;
  double x_r = 0.0;
  Vec3 partials = Vec3::Zero();
  if (f.type == FactorType::kCurvature) {
    value = path_curvature(state, f.kappa_r, f.dkappa_r);
    bound = problem_->kappa_max;
    x_r = pp.x_r_curvature;
    if (!saturated) partials = path_curvature_partials(state, f.kappa_r, f.dkappa_r);
  } else {  // kLatAcc
    value = state.d_pprime * f.s_dot * f.s_dot + state.d_prime * f.s_ddot;
    bound = f.a_lat_max;
    x_r = f.x_r_lat;
    if (!saturated) partials = Vec3(0.0, f.s_ddot, f.s_dot * f.s_dot);
  }

  const double x_hi = bound - value + x_r;
  const double x_lo = value + bound + x_r;
  const double r = penalty(x_hi, x_r, pp.alpha) + penalty(x_lo, x_r, pp.alpha);
  out.cost = 0.5 * f.inv_sigma * r * r;
  if (r != 0.0 && !saturated) {
    const double dr_dv = -penalty_derivative(x_hi, x_r, pp.alpha) +
                         penalty_derivative(x_lo, x_r, pp.alpha);
    const Eigen::RowVector3d jrow = dr_dv * partials.transpose();
    const Eigen::RowVector3d ja = jrow * f.interp.lambda;
    const Eigen::RowVector3d jb = jrow * f.interp.psi;
    out.h_aa = f.inv_sigma * ja.transpose() * ja;
    out.h_ab = f.inv_sigma * ja.transpose() * jb;
    out.h_bb = f.inv_sigma * jb.transpose() * jb;
    out.g_a = f.inv_sigma * ja.transpose() * r;
    out.g_b = f.inv_sigma * jb.transpose() * r;
  }
  return out;
}

double PathFactorGraph::factor_cost(
    const Factor& f, const std::vector<LateralState>& states) const {
  switch (f.type) {
    case FactorType::kGpPrior: {
      const Vec3 r =
          f.phi * states[f.station].vec() - states[f.station + 1].vec();
      return 0.5 * r.dot(f.weight_info * r);
    }
    case FactorType::kObservation: {
      const Vec3 r = states[f.station].vec() - f.target.vec();
      return 0.5 * r.dot(f.weight_diag.cwiseProduct(r));
    }
    default:
      break;
  }

  const Vec3 xa = states[f.station].vec();
  const Vec3 xb = states[f.station + 1].vec();
  const auto [state, saturated] =
      guard_state(LateralState(f.interp.lambda * xa + f.interp.psi * xb),
                  f.kappa_r);
  const PenaltyParams& pp = problem_->penalty;

  if (f.type == FactorType::kCollision) {
    const double theta = std::atan2(state.d_prime, 1.0 - f.kappa_r * state.d);
    const double clearance = problem_->vehicle.clearance_required();
    const double x_r = pp.x_r_collision;
    double cost = 0.0;
    for (double l : problem_->vehicle.circle_offsets) {
      const FrenetPoint center{f.s_query + l * std::cos(theta),
                               state.d + l * std::sin(theta)};
      const EsdfQuery q = problem_->esdf->query(center);
      const double r =
          penalty(q.distance - clearance + x_r, x_r, pp.alpha);
      cost += 0.5 * f.inv_sigma * r * r;
    }
    return cost;
  }

  double value = 0.0;
  double bound = 0.0;
  double x_r = 0.0;
  if (f.type == FactorType::kCurvature) {
    value = path_curvature(state, f.kappa_r, f.dkappa_r);
    bound = problem_->kappa_max;
    x_r = pp.x_r_curvature;
  } else {
    value = state.d_pprime * f.s_dot * f.s_dot + state.d_prime * f.s_ddot;
    bound = f.a_lat_max;
    x_r = f.x_r_lat;
  }
  const double r = penalty(bound - value + x_r, x_r, pp.alpha) +
                   penalty(value + bound + x_r, x_r, pp.alpha);
  return 0.5 * f.inv_sigma * r * r;
}

double PathFactorGraph::cost(const std::vector<LateralState>& states) const {
  double total = 0.0;
  for (const Factor& f : factors_) total += factor_cost(f, states);
  return total;
}

CostBreakdown PathFactorGraph::cost_breakdown(
    const std::vector<LateralState>& states) const {
  CostBreakdown out;
  for (const Factor& f : factors_) {
    const double c = factor_cost(f, states);
    switch (f.type) {
      case FactorType::kGpPrior: out.prior += c; break;
      case FactorType::kObservation: out.observation += c; break;
      case FactorType::kCollision: out.collision += c; break;
      case FactorType::kCurvature: out.curvature += c; break;
      case FactorType::kLatAcc: out.lat_acc += c; break;
    }
  }
  return out;
}

void PathFactorGraph::assemble(const std::vector<LateralState>& states,
                               BlockTridiagonal* sys) const {
  sys->resize(num_stations());
  for (const Factor& f : factors_) {
    const FactorBlocks b = linearize_factor(f, states);
    sys->diag[f.station] += b.h_aa;
    sys->rhs[f.station] -= b.g_a;
    if (f.binary) {
      sys->diag[f.station + 1] += b.h_bb;
      sys->upper[f.station] += b.h_ab;
      sys->rhs[f.station + 1] -= b.g_b;
    }
  }
}

PathSolution solve_map(const PathProblem& problem,
                       const std::vector<LateralState>& init,
                       const SolveOptions& options) {
  const double t0 = now_ms();
  PathSolution out;
  out.chain = problem.chain;

  PathFactorGraph graph(problem);
  const int n = graph.num_stations();
  if (static_cast<int>(init.size()) != n) {
    throw std::invalid_argument("solve_map: init size mismatch");
  }

  std::vector<LateralState> states = init;
  double cost = graph.cost(states);
  if (!std::isfinite(cost)) {
    out.diag.error = "non-finite initial cost";
    out.chain.states = states;
    return out;
  }

  BlockTridiagonal sys;
  std::vector<Vec3> delta;
  double lambda = 1e-4;
  bool converged = false;
  int iterations = 0;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    ++iterations;
    graph.assemble(states, &sys);

    bool accepted = false;
    double trial_cost = cost;
    std::vector<LateralState> trial(states.size());
    for (int attempt = 0; attempt < 14 && !accepted; ++attempt) {
      BlockTridiagonal damped = sys;
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
          damped.diag[i](k, k) += lambda * std::max(sys.diag[i](k, k), 1e-9);
        }
      }
      if (block_thomas_solve(damped, &delta)) {
        for (int i = 0; i < n; ++i) {
          trial[i] = LateralState(states[i].vec() + delta[i]);
        }
        trial_cost = graph.cost(trial);
        if (std::isfinite(trial_cost) && trial_cost <= cost) {
          accepted = true;
          break;
        }
      }
      lambda = std::min(lambda * 4.0, 1e12);
    }
    if (!accepted) {
      converged = true;  // no descent direction left at max damping
      break;
    }
    const double decrease = cost - trial_cost;
    states = trial;
    cost = trial_cost;
    lambda = std::max(lambda / 3.0, 1e-12);
    if (decrease <= options.relative_tolerance * std::max(cost, 1e-12)) {
      converged = true;
      break;
    }
  }

  out.chain.states = states;
  out.diag.iterations = iterations;
  out.diag.converged = converged;
  out.diag.cost = graph.cost_breakdown(states);
  if (!std::isfinite(cost)) out.diag.error = "non-finite cost";
  out.diag.wall_ms = now_ms() - t0;
  return out;
}

namespace {

struct SideInterval {
  double s_lo = 0.0;
  double s_hi = 0.0;
  double d_target = 0.0;
};

// Piecewise jerk-optimal quintics between knot states.
std::vector<LateralState> evaluate_knot_path(
    const std::vector<std::pair<double, LateralState>>& knots,
    const std::vector<double>& stations) {
  std::vector<Quintic> segs(knots.size() - 1);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    segs[k] = jerk_optimal_quintic(knots[k].second, knots[k + 1].second,
                                   knots[k + 1].first - knots[k].first);
  }
  std::vector<LateralState> states;
  states.reserve(stations.size());
  for (double s : stations) {
    std::size_t k = 0;
    while (k + 2 < knots.size() && s > knots[k + 1].first) ++k;
    const double local = std::clamp(s - knots[k].first, 0.0,
                                    knots[k + 1].first - knots[k].first);
    states.push_back(segs[k].state(local));
  }
  return states;
}

}  // namespace

std::vector<LateralState> initialize_path(const PathProblem& problem,
                                          std::optional<int> pass_side_hint,
                                          PathDiagnostics* diag) {
  // Constraint-free chain solve: GP prior + observations only. The system is
  // linear, so the first LM step is the exact solution.
  PathProblem free_problem = problem;
  free_problem.esdf = nullptr;
  free_problem.kappa_max = 0.0;
  std::vector<LateralState> zero(problem.chain.stations.size());
  SolveOptions quick;
  quick.max_iterations = 3;
  const std::vector<LateralState> straight =
      solve_map(free_problem, zero, quick).chain.states;

  PathFactorGraph graph(problem);
  const auto collision_cost = [&](const std::vector<LateralState>& states) {
    return graph.cost_breakdown(states).collision;
  };

  if (diag != nullptr) diag->init_candidates = 1;
  if (problem.esdf == nullptr || collision_cost(straight) <= 1e-12 ||
      problem.frenet_obstacles.empty()) {
    if (diag != nullptr) diag->init_collision_free = true;
    return straight;
  }

  const double s0 = problem.chain.stations.front();
  const double sn = problem.chain.stations.back();
  const double clear = problem.vehicle.clearance_required();
  double reach = 0.0;
  for (double l : problem.vehicle.circle_offsets)
    reach = std::max(reach, std::abs(l));
  reach += clear;

  // Find obstacles the straight path actually passes through.
  struct Blocker {
    double s_lo, s_hi, d_lo, d_hi;
  };
  std::vector<Blocker> blockers;
  for (const auto& poly : problem.frenet_obstacles) {
    if (poly.empty()) continue;
    Blocker b{1e18, -1e18, 1e18, -1e18};
    for (const auto& p : poly) {
      b.s_lo = std::min(b.s_lo, p.s);
      b.s_hi = std::max(b.s_hi, p.s);
      b.d_lo = std::min(b.d_lo, p.d);
      b.d_hi = std::max(b.d_hi, p.d);
    }
    if (b.s_hi < s0 - reach || b.s_lo > sn + reach) continue;
    bool hits = false;
    const double lo = std::max(b.s_lo - reach, s0);
    const double hi = std::min(b.s_hi + reach, sn);
    for (double s = lo; s <= hi + 1e-9; s += 1.0) {
      // Lateral offset of the straight solve at s.
      const auto& st = problem.chain.stations;
      std::size_t i = 0;
      while (i + 2 < st.size() && s > st[i + 1]) ++i;
      const LateralState ls =
          gp_interpolate(straight[i], straight[i + 1], st[i], st[i + 1],
                         std::clamp(s, st[i], st[i + 1]));
      if (ls.d > b.d_lo - clear && ls.d < b.d_hi + clear) {
        hits = true;
        break;
      }
    }
    if (hits) blockers.push_back(b);
  }
  std::sort(blockers.begin(), blockers.end(),
            [](const Blocker& a, const Blocker& b) { return a.s_lo < b.s_lo; });
  if (blockers.size() > 4) blockers.resize(4);

  if (blockers.empty()) {
    if (diag != nullptr) diag->init_collision_free = true;
    return straight;
  }

  const double shift = clear + 0.2;
  const int combos = 1 << blockers.size();
  std::vector<LateralState> best = straight;
  double best_cost = graph.cost(straight);
  double best_extent = 0.0;
  bool best_is_straight = true;

  for (int mask = 0; mask < combos; ++mask) {
    if (pass_side_hint.has_value()) {
      // Hint forces every blocker to one side: +1 left, -1 right.
      const bool want_left = *pass_side_hint > 0;
      const int all = combos - 1;
      if ((want_left && mask != all) || (!want_left && mask != 0)) continue;
    }
    std::vector<SideInterval> intervals;
    for (std::size_t k = 0; k < blockers.size(); ++k) {
      const bool left = (mask >> k) & 1;
      SideInterval iv;
      iv.s_lo = blockers[k].s_lo - reach;
      iv.s_hi = blockers[k].s_hi + reach;
      iv.d_target = left ? blockers[k].d_hi + shift : blockers[k].d_lo - shift;
      intervals.push_back(iv);
    }
    // Merge overlaps, keeping the wider swerve.
    std::vector<SideInterval> merged;
    for (const auto& iv : intervals) {
      if (!merged.empty() && iv.s_lo <= merged.back().s_hi + 4.0) {
        merged.back().s_hi = std::max(merged.back().s_hi, iv.s_hi);
        if (std::abs(iv.d_target) > std::abs(merged.back().d_target)) {
          merged.back().d_target = iv.d_target;
        }
      } else {
        merged.push_back(iv);
      }
    }

    std::vector<std::pair<double, LateralState>> knots;
    knots.emplace_back(s0, problem.boundary_start.target);
    bool valid = true;
    for (const auto& iv : merged) {
      const double a = std::max(iv.s_lo, knots.back().first + 2.0);
      const double b = std::min(iv.s_hi, sn - 2.0);
      if (b <= a + 1.0) {
        valid = false;
        break;
      }
      knots.emplace_back(a, LateralState(iv.d_target, 0.0, 0.0));
      knots.emplace_back(b, LateralState(iv.d_target, 0.0, 0.0));
    }
    if (!valid) continue;
    knots.emplace_back(sn, problem.boundary_end.target);

    const std::vector<LateralState> candidate =
        evaluate_knot_path(knots, problem.chain.stations);
    const double cost = graph.cost(candidate);
    double extent = 0.0;
    for (const auto& iv : merged) extent = std::max(extent, std::abs(iv.d_target));
    if (diag != nullptr) ++diag->init_candidates;

    const bool better =
        cost < best_cost - 1e-9 ||
        (std::abs(cost - best_cost) <= 1e-9 && extent < best_extent);
    if (better) {
      best = candidate;
      best_cost = cost;
      best_extent = extent;
      best_is_straight = false;
    }
  }

  (void)best_is_straight;
  if (diag != nullptr) {
    diag->init_collision_free = collision_cost(best) <= 1e-12;
  }
  return best;
}

SampledPath::SampledPath(const GpChain& chain, const ReferenceLine& ref,
                         double step)
    : chain_(chain), ref_(&ref) {
  const auto& st = chain_.stations;
  if (st.size() < 2) throw std::invalid_argument("SampledPath: short chain");
  const double s_begin = st.front();
  const double s_end = st.back();
  const int count = static_cast<int>(std::ceil((s_end - s_begin) / step)) + 1;

  samples_.reserve(count);
  std::size_t seg = 0;
  double s_path = 0.0;
  Vec2 prev_pos;
  for (int i = 0; i < count; ++i) {
    const double s = std::min(s_begin + i * step, s_end);
    while (seg + 2 < st.size() && s > st[seg + 1]) ++seg;
    PathSamplePoint p;
    p.s_ref = s;
    p.lateral = gp_interpolate(chain_.states[seg], chain_.states[seg + 1],
                               st[seg], st[seg + 1], s);
    const CartesianPose pose =
        frenet_to_cartesian(ref, {s, p.lateral.d}, p.lateral.d_prime);
    p.position = pose.position;
    p.heading = pose.heading;
    p.kappa = path_curvature(p.lateral, ref.kappa_at(s), ref.dkappa_at(s));
    if (i > 0) s_path += (p.position - prev_pos).norm();
    p.s_path = s_path;
    prev_pos = p.position;
    samples_.push_back(p);
  }
}

double SampledPath::ref_s_at(double s_path) const {
  if (samples_.empty()) return 0.0;
  if (s_path <= 0.0) return samples_.front().s_ref;
  if (s_path >= length()) return samples_.back().s_ref;
  auto it = std::upper_bound(
      samples_.begin(), samples_.end(), s_path,
      [](double v, const PathSamplePoint& p) { return v < p.s_path; });
  const std::size_t i = static_cast<std::size_t>(it - samples_.begin()) - 1;
  const auto& a = samples_[i];
  const auto& b = samples_[i + 1];
  const double span = b.s_path - a.s_path;
  const double t = span > 1e-12 ? (s_path - a.s_path) / span : 0.0;
  return a.s_ref + t * (b.s_ref - a.s_ref);
}

double SampledPath::abs_kappa_at(double s_path) const {
  if (samples_.empty()) return 0.0;
  const double sp = std::clamp(s_path, 0.0, length());
  auto it = std::upper_bound(
      samples_.begin(), samples_.end(), sp,
      [](double v, const PathSamplePoint& p) { return v < p.s_path; });
  std::size_t i = (it == samples_.begin())
                      ? 0
                      : static_cast<std::size_t>(it - samples_.begin()) - 1;
  if (i + 1 >= samples_.size()) i = samples_.size() - 2;
  const auto& a = samples_[i];
  const auto& b = samples_[i + 1];
  const double span = b.s_path - a.s_path;
  const double t = span > 1e-12 ? (sp - a.s_path) / span : 0.0;
  return std::abs(a.kappa + t * (b.kappa - a.kappa));
}

PathSamplePoint SampledPath::state_at(double s_path) const {
  const double sp = std::clamp(s_path, 0.0, length());
  const double s = ref_s_at(sp);
  const auto& st = chain_.stations;
  std::size_t seg = 0;
  while (seg + 2 < st.size() && s > st[seg + 1]) ++seg;

  PathSamplePoint p;
  p.s_ref = s;
  p.s_path = sp;
  p.lateral = gp_interpolate(chain_.states[seg], chain_.states[seg + 1],
                             st[seg], st[seg + 1],
                             std::clamp(s, st[seg], st[seg + 1]));
  const CartesianPose pose =
      frenet_to_cartesian(*ref_, {s, p.lateral.d}, p.lateral.d_prime);
  p.position = pose.position;
  p.heading = pose.heading;
  p.kappa = path_curvature(p.lateral, ref_->kappa_at(s), ref_->dkappa_at(s));
  return p;
}

}  // namespace gptraj
