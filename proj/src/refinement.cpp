#include "gptraj/refinement.h"

#include <algorithm>
#include <chrono>
#include <optional>
#include <cmath>

namespace gptraj {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

double lateral_acceleration(const LateralState& state, double s_dot,
                            double s_ddot) {
  return state.d_pprime * s_dot * s_dot + state.d_prime * s_ddot;
}

Factor make_lat_acc_factor(const GpChain& chain, double s_query, double s_dot,
                           double s_ddot, const LatAccParams& params) {
  const auto& st = chain.stations;
  std::size_t seg = 0;
  while (seg + 2 < st.size() && s_query > st[seg + 1]) ++seg;
  const double sq = std::clamp(s_query, st[seg], st[seg + 1]);

  Factor f;
  f.type = FactorType::kLatAcc;
  f.station = static_cast<int>(seg);
  f.binary = true;
  f.interp = gp_interpolation_matrices(st[seg], st[seg + 1], sq);
  f.s_query = sq;
  f.inv_sigma = 1.0 / params.sigma_lat;
  f.s_dot = s_dot;
  f.s_ddot = s_ddot;
  f.a_lat_max = params.a_lat_max * params.bound_margin;
  f.x_r_lat = params.x_r_lat;
  return f;
}

IncrementalChainSolver::IncrementalChainSolver(PathFactorGraph* graph,
                                               std::vector<LateralState> states,
                                               bool incremental)
    : graph_(graph), states_(std::move(states)), incremental_(incremental) {
  const int n = graph_->num_stations();
  const std::size_t m = graph_->factors().size();
  blocks_.resize(m);
  factor_costs_.resize(m);
  total_cost_ = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    relinearize_factor(static_cast<int>(i));
    factor_costs_[i] = blocks_[i].cost;
    total_cost_ += factor_costs_[i];
  }
  sys_.resize(n);
  elim_.reset(n);
  rebuild_stations(0);
  elim_.eliminate_suffix(sys_, 0);
}

void IncrementalChainSolver::relinearize_factor(int index) {
  blocks_[index] =
      graph_->linearize_factor(graph_->factors()[index], states_);
}

void IncrementalChainSolver::rebuild_stations(int from) {
  const int n = graph_->num_stations();
  for (int i = std::max(from, 0); i < n; ++i) {
    sys_.diag[i].setZero();
    sys_.rhs[i].setZero();
    if (i + 1 < n) sys_.upper[i].setZero();
    for (int idx : graph_->factors_touching_a(i)) {
      sys_.diag[i] += blocks_[idx].h_aa;
      sys_.rhs[i] -= blocks_[idx].g_a;
      if (graph_->factors()[idx].binary) sys_.upper[i] += blocks_[idx].h_ab;
    }
    for (int idx : graph_->factors_touching_b(i)) {
      sys_.diag[i] += blocks_[idx].h_bb;
      sys_.rhs[i] -= blocks_[idx].g_b;
    }
  }
}

IncrementalChainSolver::UpdateStats IncrementalChainSolver::add_factors_and_update(
    const std::vector<Factor>& new_factors) {
  UpdateStats stats;
  if (new_factors.empty()) return stats;

  int dirty = graph_->add_factors(new_factors);
  const std::size_t old_count = blocks_.size();
  blocks_.resize(graph_->factors().size());
  factor_costs_.resize(graph_->factors().size());
  for (std::size_t i = old_count; i < blocks_.size(); ++i) {
    relinearize_factor(static_cast<int>(i));
    factor_costs_[i] = blocks_[i].cost;
    total_cost_ += factor_costs_[i];
  }
  if (!incremental_) dirty = 0;

  const int n = graph_->num_stations();
  std::vector<Vec3> delta;
  std::vector<LateralState> trial(states_.size());
  std::vector<int> affected_factors;
  std::vector<double> new_costs;
  std::vector<uint8_t> affected_mask(blocks_.size(), 0);

  for (int outer = 0; outer < 50; ++outer) {
    rebuild_stations(dirty);
    const int count = elim_.eliminate_suffix(sys_, dirty);
    if (outer == 0) stats.first_pass_stations = count;
    stats.total_eliminations += count;
    ++stats.outer_iterations;
    elim_.back_substitute(sys_, &delta);

    const double threshold = incremental_ ? 1e-8 : 1e-12;
    std::vector<int> moved;
    for (int i = 0; i < n; ++i) {
      if (delta[i].cwiseAbs().maxCoeff() > threshold) moved.push_back(i);
    }
    if (moved.empty()) break;

    // Factors whose cost can change under this step.
    affected_factors.clear();
    for (int i : moved) {
      for (int idx : graph_->factors_touching_a(i)) {
        if (!affected_mask[idx]) {
          affected_mask[idx] = 1;
          affected_factors.push_back(idx);
        }
      }
      for (int idx : graph_->factors_touching_b(i)) {
        if (!affected_mask[idx]) {
          affected_mask[idx] = 1;
          affected_factors.push_back(idx);
        }
      }
    }
    for (int idx : affected_factors) affected_mask[idx] = 0;
    double affected_old = 0.0;
    for (int idx : affected_factors) affected_old += factor_costs_[idx];

    // Backtracking step on the total cost; only affected factors are
    // re-evaluated, and only moved stations change, so the untouched prefix
    // keeps its exact linearization points.
    double alpha = 1.0;
    bool accepted = false;
    double trial_total = total_cost_;
    while (alpha > 1e-4) {
      trial = states_;
      for (int i : moved) {
        trial[i] = LateralState(states_[i].vec() + alpha * delta[i]);
      }
      new_costs.assign(affected_factors.size(), 0.0);
      double affected_new = 0.0;
      for (std::size_t k = 0; k < affected_factors.size(); ++k) {
        new_costs[k] =
            graph_->factor_cost(graph_->factors()[affected_factors[k]], trial);
        affected_new += new_costs[k];
      }
      trial_total = total_cost_ - affected_old + affected_new;
      if (std::isfinite(trial_total) && trial_total <= total_cost_ + 1e-15) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    states_ = trial;
    const double decrease = total_cost_ - trial_total;
    total_cost_ = trial_total;
    for (std::size_t k = 0; k < affected_factors.size(); ++k) {
      factor_costs_[affected_factors[k]] = new_costs[k];
    }
    for (int idx : affected_factors) relinearize_factor(idx);
    dirty = incremental_ ? std::max(0, moved.front() - 1) : 0;

    if (decrease <= 1e-12 * std::max(total_cost_, 1.0)) break;
  }
  stats.final_cost = total_cost_;
  return stats;
}

RefineResult refine(PathFactorGraph& graph,
                    const std::vector<LateralState>& initial_states,
                    const ReferenceLine& ref, const StProfile& initial_profile,
                    const LatAccParams& params, const SpeedReplanFn& replan) {
  RefineResult result;
  result.states = initial_states;
  result.profile = initial_profile;

  const GpChain& base_chain = graph.problem()->chain;
  // The incremental solver keeps its elimination across iterations (built on
  // first use); the non-incremental mode re-solves the augmented problem from
  // scratch in every iteration (the comparison baseline).
  std::optional<IncrementalChainSolver> solver;

  GpChain chain = base_chain;
  chain.states = result.states;
  SampledPath path(chain, ref);

  for (int iter = 0; iter <= params.max_iterations; ++iter) {
    RefineIteration log_entry;
    log_entry.iteration = iter;

    // Sample the fused trajectory and collect violating stations.
    std::vector<Factor> new_factors;
    double max_abs = 0.0;
    const double horizon = result.profile.horizon();
    for (double t = 0.0; t <= horizon + 1e-9; t += params.sample_dt) {
      const double s_path = result.profile.s_at(t);
      if (s_path > path.length() + 1e-9) break;
      const double s_ref = path.ref_s_at(s_path);
      const auto& st = chain.stations;
      std::size_t seg = 0;
      while (seg + 2 < st.size() && s_ref > st[seg + 1]) ++seg;
      const LateralState state = gp_interpolate(
          chain.states[seg], chain.states[seg + 1], st[seg], st[seg + 1],
          std::clamp(s_ref, st[seg], st[seg + 1]));
      const double s_dot = result.profile.v_at(t);
      const double s_ddot = result.profile.a_at(t);
      const double a_lat = lateral_acceleration(state, s_dot, s_ddot);
      log_entry.a_lat_samples.emplace_back(t, a_lat);
      max_abs = std::max(max_abs, std::abs(a_lat));
      if (std::abs(a_lat) > params.a_lat_max) {
        new_factors.push_back(
            make_lat_acc_factor(chain, s_ref, s_dot, s_ddot, params));
      }
    }
    log_entry.max_abs_a_lat = max_abs;
    log_entry.factors_added = static_cast<int>(new_factors.size());

    if (new_factors.empty()) {
      result.feasible = true;
      result.log.push_back(log_entry);
      break;
    }
    if (iter == params.max_iterations) {
      // Iteration budget exhausted with violations left.
      result.log.push_back(log_entry);
      break;
    }

    double t0 = now_ms();
    if (!params.incremental) {
      solver.emplace(&graph, result.states, false);
    } else if (!solver.has_value()) {
      solver.emplace(&graph, result.states, true);
    }
    const auto stats = solver->add_factors_and_update(new_factors);
    log_entry.path_update_ms = now_ms() - t0;
    log_entry.stations_reeliminated = stats.first_pass_stations;
    result.states = solver->states();
    chain.states = result.states;
    path = SampledPath(chain, ref);

    t0 = now_ms();
    try {
      result.profile = replan(path);
    } catch (const std::exception& e) {
      log_entry.speed_replan_ms = now_ms() - t0;
      result.log.push_back(log_entry);
      result.error = std::string("speed replan failed: ") + e.what();
      result.feasible = false;
      ++result.iterations;
      return result;
    }
    log_entry.speed_replan_ms = now_ms() - t0;
    result.log.push_back(log_entry);
    ++result.iterations;
  }
  return result;
}

}  // namespace gptraj
