#include "gptraj/speed_planner.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gptraj/qp.h"

namespace gptraj {

namespace {

constexpr double kBlockShell = 5.0;      // m, J_b proximity shell
constexpr double kCorridorMargin = 0.1;  // m, clearance to carved bounds

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double bernstein(int n, int k, double u) {
  return binom(n, k) * std::pow(u, k) * std::pow(1.0 - u, n - k);
}

// integral over [0,1] of B_k^n B_l^n
double bernstein_gram(int n, int k, int l) {
  return binom(n, k) * binom(n, l) / (binom(2 * n, k + l) * (2 * n + 1));
}

// Position along a constant-acceleration edge with stop-and-hold.
double edge_position(double s, double v, double a, double tau) {
  if (a < 0.0) {
    const double t_stop = -v / a;
    if (tau >= t_stop) return s - 0.5 * v * v / a;
  }
  return s + v * tau + 0.5 * a * tau * tau;
}

double edge_duration_moving(double v, double a, double t_f) {
  if (a < 0.0) {
    const double t_stop = -v / a;
    if (t_stop < t_f) return t_stop;
  }
  return t_f;
}

}  // namespace

double BlockedRegion::gap_at(double t, double s) const {
  const int k = slice_index(t);
  if (!has_slice(k)) return std::numeric_limits<double>::infinity();
  if (s < slices[k].s_low) return slices[k].s_low - s;
  if (s > slices[k].s_high) return s - slices[k].s_high;
  return 0.0;
}

std::vector<BlockedRegion> project_trajectories(
    const std::vector<PathSamplePoint>& path_samples,
    const std::vector<AgentPrediction>& agents, double horizon, double t_s,
    double ego_length, double ego_width) {
  std::vector<BlockedRegion> regions;
  const int n_slices = static_cast<int>(std::floor(horizon / t_s + 1e-9)) + 1;
  const double inflate = 0.5 * ego_width;

  for (const AgentPrediction& agent : agents) {
    BlockedRegion region;
    region.t0 = 0.0;
    region.dt = t_s;
    region.slices.assign(n_slices, {});
    bool any = false;

    const double cos_h = std::cos(agent.heading);
    const double sin_h = std::sin(agent.heading);
    const double hl = 0.5 * agent.length;
    const double hw = 0.5 * agent.width;
    // Early-out radius: beyond it no path point can touch the box.
    const double reach = std::hypot(hl, hw) + inflate;

    for (int k = 0; k < n_slices; ++k) {
      const Vec2 center = agent.position_at(k * t_s);
      double s_lo = std::numeric_limits<double>::infinity();
      double s_hi = -s_lo;
      for (const PathSamplePoint& p : path_samples) {
        const Vec2 rel = p.position - center;
        if (rel.squaredNorm() > reach * reach) continue;
        const double bx = rel.x() * cos_h + rel.y() * sin_h;
        const double by = -rel.x() * sin_h + rel.y() * cos_h;
        const double dx = std::max(std::abs(bx) - hl, 0.0);
        const double dy = std::max(std::abs(by) - hw, 0.0);
        if (dx * dx + dy * dy <= inflate * inflate) {
          s_lo = std::min(s_lo, p.s_path);
          s_hi = std::max(s_hi, p.s_path);
        }
      }
      if (s_lo <= s_hi) {
        region.slices[k] = {s_lo - 0.5 * ego_length, s_hi + 0.5 * ego_length};
        any = true;
      }
    }
    if (any) regions.push_back(std::move(region));
  }
  return regions;
}

StNode expand(const StNode& node, double a, double t_f) {
  StNode child;
  child.parent = -1;
  child.t = node.t + t_f;
  child.a_applied = a;
  const double v_next = node.s_dot + a * t_f;
  if (v_next < 0.0) {
    // Stops inside the interval and holds.
    child.s = node.s - 0.5 * node.s_dot * node.s_dot / a;
    child.s_dot = 0.0;
  } else {
    child.s = node.s + node.s_dot * t_f + 0.5 * a * t_f * t_f;
    child.s_dot = v_next;
  }
  return child;
}

std::vector<StNode> local_truncation(const std::vector<StNode>& children,
                                     double r_g) {
  if (children.empty()) return {};
  std::vector<StNode> sorted = children;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const StNode& a, const StNode& b) { return a.s < b.s; });
  // Greedy diameter-bounded clusters along s: a cluster spans at most r_g, so
  // every ~r_g of reachable longitudinal space keeps one representative.
  std::vector<StNode> kept;
  std::size_t cluster_start = 0;
  auto flush = [&](std::size_t end) {
    const StNode* best = &sorted[cluster_start];
    for (std::size_t i = cluster_start + 1; i < end; ++i) {
      const StNode& c = sorted[i];
      if (c.cost < best->cost - 1e-12 ||
          (std::abs(c.cost - best->cost) <= 1e-12 && c.s_dot > best->s_dot)) {
        best = &c;
      }
    }
    kept.push_back(*best);
  };
  for (std::size_t i = cluster_start + 1; i < sorted.size(); ++i) {
    if (sorted[i].s - sorted[cluster_start].s > r_g) {
      flush(i);
      cluster_start = i;
    }
  }
  flush(sorted.size());
  return kept;
}

namespace {

bool edge_blocked(const std::vector<BlockedRegion>& regions,
                  const StNode& parent, const StNode& child) {
  for (const BlockedRegion& region : regions) {
    const int k_lo = static_cast<int>(
        std::ceil((parent.t - region.t0) / region.dt - 1e-9));
    const int k_hi = static_cast<int>(
        std::floor((child.t - region.t0) / region.dt + 1e-9));
    for (int k = std::max(k_lo, 0); k <= k_hi; ++k) {
      if (!region.has_slice(k)) continue;
      const double tk = region.t0 + k * region.dt;
      if (tk <= parent.t + 1e-12) continue;  // parent slice owned by last edge
      const double s = edge_position(parent.s, parent.s_dot, child.a_applied,
                                     tk - parent.t);
      if (s >= region.slices[k].s_low && s <= region.slices[k].s_high) {
        return true;
      }
    }
  }
  return false;
}

double proximity_cost(const std::vector<BlockedRegion>& regions,
                      const StNode& node) {
  double cost = 0.0;
  for (const BlockedRegion& region : regions) {
    const double gap = region.gap_at(node.t, node.s);
    if (std::isfinite(gap)) {
      cost += std::max(0.0, 1.0 - gap / kBlockShell);
    }
  }
  return cost;
}

}  // namespace

SearchResult search_speed_profile(
    const Vec3& initial_state, const std::vector<BlockedRegion>& regions,
    const SpeedLimits& limits, const SpeedWeights& weights,
    const SearchParams& params,
    const std::function<double(double)>& ref_speed) {
  SearchResult result;
  std::vector<StNode> arena;
  StNode root;
  root.s = initial_state[0];
  root.s_dot = std::max(0.0, initial_state[1]);
  arena.push_back(root);
  result.explored.push_back(root);

  std::vector<int> frontier{0};
  std::vector<StNode> children;
  for (int round = 1; round <= params.n_rounds; ++round) {
    children.clear();
    for (int parent_idx : frontier) {
      const StNode& parent = arena[parent_idx];
      for (int j = 0; j < params.n_accel; ++j) {
        const double a =
            limits.a_min + (limits.a_max - limits.a_min) * j /
                               static_cast<double>(params.n_accel - 1);
        StNode child = expand(parent, a, params.t_f);
        child.parent = parent_idx;
        ++result.expanded;
        if (edge_blocked(regions, parent, child)) continue;
        const double t_eff =
            edge_duration_moving(parent.s_dot, a, params.t_f);
        const double j_u = a * a * t_eff;
        const double j_r = std::abs(child.s_dot - ref_speed(child.s));
        const double j_b = proximity_cost(regions, child);
        child.cost = parent.cost + weights.w_u * j_u + weights.w_r * j_r +
                     weights.w_b * j_b;
        children.push_back(child);
      }
    }
    if (children.empty()) {
      result.feasible = false;
      return result;
    }
    const std::vector<StNode> survivors =
        params.truncation ? local_truncation(children, params.r_g) : children;
    frontier.clear();
    for (const StNode& node : survivors) {
      arena.push_back(node);
      frontier.push_back(static_cast<int>(arena.size()) - 1);
      result.explored.push_back(node);
    }
    result.kept += static_cast<int>(survivors.size());
  }

  // Min-cost leaf, ties toward higher speed.
  int best = frontier.front();
  for (int idx : frontier) {
    const StNode& n = arena[idx];
    const StNode& b = arena[best];
    if (n.cost < b.cost - 1e-12 ||
        (std::abs(n.cost - b.cost) <= 1e-12 && n.s_dot > b.s_dot)) {
      best = idx;
    }
  }
  for (int idx = best; idx >= 0; idx = arena[idx].parent) {
    result.chain.push_back(arena[idx]);
  }
  std::reverse(result.chain.begin(), result.chain.end());
  result.feasible = true;
  return result;
}

double BezierSegment::value(double t) const {
  const double u = std::clamp((t - t0) / duration, 0.0, 1.0);
  double acc = 0.0;
  for (int k = 0; k <= 5; ++k) acc += ctrl[k] * bernstein(5, k, u);
  return acc;
}

double BezierSegment::deriv(double t) const {
  const double u = std::clamp((t - t0) / duration, 0.0, 1.0);
  double acc = 0.0;
  for (int k = 0; k <= 4; ++k) {
    acc += (ctrl[k + 1] - ctrl[k]) * bernstein(4, k, u);
  }
  return 5.0 / duration * acc;
}

double BezierSegment::accel(double t) const {
  const double u = std::clamp((t - t0) / duration, 0.0, 1.0);
  double acc = 0.0;
  for (int k = 0; k <= 3; ++k) {
    acc += (ctrl[k + 2] - 2.0 * ctrl[k + 1] + ctrl[k]) * bernstein(3, k, u);
  }
  return 20.0 / (duration * duration) * acc;
}

namespace {

const BezierSegment& segment_at(const std::vector<BezierSegment>& segments,
                                double t) {
  for (const BezierSegment& seg : segments) {
    if (t <= seg.t0 + seg.duration + 1e-12) return seg;
  }
  return segments.back();
}

}  // namespace

double StProfile::s_at(double t) const { return segment_at(segments, t).value(t); }
double StProfile::v_at(double t) const { return segment_at(segments, t).deriv(t); }
double StProfile::a_at(double t) const { return segment_at(segments, t).accel(t); }

double StProfile::time_at_s(double s) const {
  const double h = horizon();
  if (s_at(0.0) >= s) return 0.0;
  if (s_at(h) < s) return h;
  double lo = 0.0;
  double hi = h;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (s_at(mid) < s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

StProfile smooth_profile(const std::vector<StNode>& coarse,
                         const std::vector<BlockedRegion>& regions,
                         const SpeedLimits& limits, const SearchParams& params,
                         const std::function<double(double)>& abs_kappa,
                         const Vec3& initial_state, SmoothDiagnostics* diag,
                         const SmoothWeights& weights) {
  if (coarse.size() < 2) {
    throw std::invalid_argument("smooth_profile: coarse chain too short");
  }
  const int m = static_cast<int>(coarse.size()) - 1;  // segments
  const double t_f = params.t_f;
  const int n_var = 6 * m;

  auto var = [&](int seg, int k) { return 6 * seg + k; };
  auto coarse_s = [&](double t) {
    const int j = std::clamp(static_cast<int>(t / t_f), 0, m - 1);
    return edge_position(coarse[j].s, coarse[j].s_dot,
                         coarse[j + 1].a_applied, t - coarse[j].t);
  };

  // Objective: w_acc * int s''^2 + w_jerk * int s'''^2 + w_dev on segment
  // endpoints; assembled as 1/2 x' H x + g' x.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_var, n_var);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_var);

  Eigen::Matrix<double, 4, 6> d2 = Eigen::Matrix<double, 4, 6>::Zero();
  for (int k = 0; k < 4; ++k) {
    d2(k, k) = 1.0;
    d2(k, k + 1) = -2.0;
    d2(k, k + 2) = 1.0;
  }
  Eigen::Matrix<double, 3, 6> d3 = Eigen::Matrix<double, 3, 6>::Zero();
  for (int k = 0; k < 3; ++k) {
    d3(k, k) = -1.0;
    d3(k, k + 1) = 3.0;
    d3(k, k + 2) = -3.0;
    d3(k, k + 3) = 1.0;
  }
  Eigen::Matrix4d gram3;
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) gram3(k, l) = bernstein_gram(3, k, l);
  }
  Eigen::Matrix3d gram2;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) gram2(k, l) = bernstein_gram(2, k, l);
  }
  const Eigen::Matrix<double, 6, 6> q_acc =
      (400.0 / std::pow(t_f, 3)) * d2.transpose() * gram3 * d2;
  const Eigen::Matrix<double, 6, 6> q_jerk =
      (3600.0 / std::pow(t_f, 5)) * d3.transpose() * gram2 * d3;

  for (int j = 0; j < m; ++j) {
    h.block<6, 6>(6 * j, 6 * j) +=
        2.0 * (weights.w_acc * q_acc + weights.w_jerk * q_jerk);
    // Deviation from the coarse nodes at both segment endpoints; pinning both
    // ends also makes H positive definite.
    for (int end = 0; end < 2; ++end) {
      const int idx = var(j, end == 0 ? 0 : 5);
      const double target = coarse[j + end].s;
      h(idx, idx) += 2.0 * weights.w_dev;
      g[idx] += -2.0 * weights.w_dev * target;
    }
  }

  // Equalities: initial state + C2 joints.
  const int n_eq = 3 + 3 * (m - 1);
  Eigen::MatrixXd a_eq = Eigen::MatrixXd::Zero(n_eq, n_var);
  Eigen::VectorXd b_eq = Eigen::VectorXd::Zero(n_eq);
  int row = 0;
  a_eq(row, var(0, 0)) = 1.0;
  b_eq[row++] = initial_state[0];
  a_eq(row, var(0, 1)) = 1.0;
  a_eq(row, var(0, 0)) = -1.0;
  b_eq[row++] = initial_state[1] * t_f / 5.0;
  a_eq(row, var(0, 2)) = 1.0;
  a_eq(row, var(0, 1)) = -2.0;
  a_eq(row, var(0, 0)) = 1.0;
  b_eq[row++] = initial_state[2] * t_f * t_f / 20.0;
  for (int j = 0; j + 1 < m; ++j) {
    a_eq(row, var(j, 5)) = 1.0;
    a_eq(row, var(j + 1, 0)) = -1.0;
    ++row;
    a_eq(row, var(j, 5)) = 1.0;
    a_eq(row, var(j, 4)) = -1.0;
    a_eq(row, var(j + 1, 1)) = -1.0;
    a_eq(row, var(j + 1, 0)) = 1.0;
    ++row;
    a_eq(row, var(j, 5)) = 1.0;
    a_eq(row, var(j, 4)) = -2.0;
    a_eq(row, var(j, 3)) = 1.0;
    a_eq(row, var(j + 1, 2)) = -1.0;
    a_eq(row, var(j + 1, 1)) = 2.0;
    a_eq(row, var(j + 1, 0)) = -1.0;
    ++row;
  }

  // Corridor carving around the coarse solution, per segment.
  auto build_corridor = [&](double pad) {
    std::vector<std::pair<double, double>> corridor(
        m, {-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()});
    for (int j = 0; j < m; ++j) {
      const double w_lo = j * t_f + pad;
      const double w_hi = (j + 1) * t_f - pad;
      for (const BlockedRegion& region : regions) {
        for (int k = 0; k < static_cast<int>(region.slices.size()); ++k) {
          if (!region.slices[k].valid()) continue;
          const double tk = region.t0 + k * region.dt;
          if (tk < w_lo - 1e-9 || tk > w_hi + 1e-9) continue;
          const double sc = coarse_s(tk);
          const auto& slice = region.slices[k];
          if (sc <= 0.5 * (slice.s_low + slice.s_high)) {
            corridor[j].second =
                std::min(corridor[j].second, slice.s_low - kCorridorMargin);
          } else {
            corridor[j].first =
                std::max(corridor[j].first, slice.s_high + kCorridorMargin);
          }
        }
      }
    }
    return corridor;
  };

  // Speed cap: road limit and curvature cap, floored by the braking envelope
  // so the cap is always reachable from the initial speed.
  std::vector<double> v_max(m);
  for (int j = 0; j < m; ++j) {
    double v_kappa = limits.v_road;
    for (double t = j * t_f; t <= (j + 1) * t_f + 1e-9; t += params.t_s) {
      v_kappa = std::min(v_kappa, limits.capped_speed(abs_kappa(coarse_s(t))));
    }
    // Tightest speed reachable at t_j under a C2 ramp from (v0, a0): the
    // first segment can only blend the acceleration down to a_min, costing a
    // quarter segment of braking.
    const double envelope =
        std::max(0.0, initial_state[1] +
                          std::max(0.0, initial_state[2]) * 0.25 * t_f +
                          limits.a_min * std::max(0.0, (j - 0.25) * t_f));
    v_max[j] = std::max(v_kappa, envelope);
  }

  auto assemble_and_solve = [&](double pad) {
    const auto corridor = build_corridor(pad);
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    auto add_row = [&](const Eigen::RowVectorXd& r, double b) {
      rows.push_back(r);
      rhs.push_back(b);
    };
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k <= 5; ++k) {
        if (std::isfinite(corridor[j].first)) {
          Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_var);
          r[var(j, k)] = 1.0;
          add_row(r, corridor[j].first);
        }
        if (std::isfinite(corridor[j].second)) {
          Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_var);
          r[var(j, k)] = -1.0;
          add_row(r, -corridor[j].second);
        }
      }
      for (int k = 0; k <= 4; ++k) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_var);
        r[var(j, k + 1)] = 1.0;
        r[var(j, k)] = -1.0;
        add_row(r, 0.0);  // non-decreasing
        add_row(-r, -v_max[j] * t_f / 5.0);
      }
      for (int k = 0; k <= 3; ++k) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_var);
        r[var(j, k + 2)] = 1.0;
        r[var(j, k + 1)] = -2.0;
        r[var(j, k)] = 1.0;
        add_row(r, limits.a_min * t_f * t_f / 20.0);
        add_row(-r, -limits.a_max * t_f * t_f / 20.0);
      }
    }
    Eigen::MatrixXd a_in(rows.size(), n_var);
    Eigen::VectorXd b_in(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      a_in.row(i) = rows[i];
      b_in[i] = rhs[i];
    }
    return solve_qp(h, g, a_eq, b_eq, a_in, b_in);
  };

  QpResult qp = assemble_and_solve(0.0);
  bool relaxed = false;
  if (!qp.feasible) {
    qp = assemble_and_solve(t_f / 4.0);
    relaxed = true;
  }
  if (diag != nullptr) {
    diag->feasible = qp.feasible;
    diag->relaxed = relaxed;
    diag->qp_iterations = qp.iterations;
  }
  if (!qp.feasible) {
    if (diag != nullptr) diag->error = "speed QP infeasible";
    throw std::runtime_error("smooth_profile: QP infeasible");
  }

  StProfile profile;
  profile.segments.resize(m);
  for (int j = 0; j < m; ++j) {
    profile.segments[j].t0 = j * t_f;
    profile.segments[j].duration = t_f;
    for (int k = 0; k <= 5; ++k) profile.segments[j].ctrl[k] = qp.x[var(j, k)];
  }
  return profile;
}

StProfile max_braking_profile(const Vec3& initial_state,
                              const SpeedLimits& limits,
                              const SearchParams& params) {
  std::vector<StNode> coarse;
  StNode node;
  node.s = initial_state[0];
  node.s_dot = std::max(0.0, initial_state[1]);
  coarse.push_back(node);
  for (int j = 0; j < params.n_rounds; ++j) {
    StNode child = expand(coarse.back(), limits.a_min, params.t_f);
    child.t = coarse.back().t + params.t_f;
    coarse.push_back(child);
  }
  // The braking start may exceed the comfort deceleration grid; open the
  // acceleration box so the initial condition stays feasible.
  SpeedLimits open = limits;
  open.a_min = std::min(limits.a_min, initial_state[2]);
  open.a_max = std::max(limits.a_max, initial_state[2]);
  Vec3 init = initial_state;
  return smooth_profile(coarse, {}, open, params,
                        [](double) { return 0.0; }, init);
}

}  // namespace gptraj
