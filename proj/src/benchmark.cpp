#include "gptraj/benchmark.h"

#include <algorithm>
#include <atomic>
#include <random>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace gptraj {

namespace {

// Stable across platforms, unlike std distributions.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::uint64_t task_seed(std::uint64_t seed, int index) {
  // splitmix64 of (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

StageStats stats_of(const std::vector<double>& values) {
  StageStats s;
  if (values.empty()) return s;
  s.min_ms = 1e18;
  for (double v : values) {
    s.min_ms = std::min(s.min_ms, v);
    s.max_ms = std::max(s.max_ms, v);
    s.avg_ms += v;
  }
  s.avg_ms /= static_cast<double>(values.size());
  return s;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Scenario make_bench_task(std::uint64_t seed, int index,
                         const BenchOptions& options) {
  std::mt19937_64 rng(task_seed(seed, index));
  Scenario s;

  // Reference line: straight or a gentle arc.
  const double ref_length = 140.0;
  const double ref_kappa =
      (index % 2 == 0) ? 0.0 : uniform(rng, -0.008, 0.008);
  for (double arc = 0.0; arc <= ref_length + 1e-9; arc += 1.0) {
    if (std::abs(ref_kappa) < 1e-9) {
      s.reference_line.emplace_back(arc, 0.0);
    } else {
      s.reference_line.emplace_back(std::sin(ref_kappa * arc) / ref_kappa,
                                    (1.0 - std::cos(ref_kappa * arc)) / ref_kappa);
    }
  }

  const double corridor =
      uniform(rng, options.corridor_min, options.corridor_max);
  s.corridor = {{-0.5 * corridor, 0.5 * corridor}};
  s.lane_width = corridor;
  s.vehicle = {};  // 4.6 x 1.8, 3 circles
  s.ego.speed = uniform(rng, options.speed_min, options.speed_max);
  s.limits.v_road = 12.0;

  const int span = std::max(0, options.max_obstacles - options.min_obstacles);
  const int count =
      options.min_obstacles +
      (span > 0 ? static_cast<int>(uniform(rng, 0.0, span + 0.999)) : 0);
  bool left = uniform(rng, 0.0, 1.0) > 0.5;
  double station = uniform(rng, 22.0, 30.0);
  for (int k = 0; k < count; ++k) {
    // Keep a feasible gap open: obstacle protrudes from one side, leaving
    // `gap` meters of free corridor at the other side.
    const double gap = uniform(rng, s.vehicle.width + 0.75,
                               s.vehicle.width + 1.3);
    const double intrusion = corridor - gap;
    if (intrusion > 0.2) {
      const double len = uniform(rng, 2.0, 5.0);
      const double d_inner = left ? 0.5 * corridor - intrusion
                                  : -(0.5 * corridor - intrusion);
      const double d_outer = left ? 0.5 * corridor + 0.8
                                  : -(0.5 * corridor + 0.8);
      // Frenet rectangle -> cartesian corners through the reference geometry.
      auto to_xy = [&](double arc, double d) {
        if (std::abs(ref_kappa) < 1e-9) return Vec2(arc, d);
        const double h = ref_kappa * arc;
        const Vec2 base(std::sin(h) / ref_kappa, (1.0 - std::cos(h)) / ref_kappa);
        return Vec2(base.x() - d * std::sin(h), base.y() + d * std::cos(h));
      };
      s.static_obstacles.push_back({to_xy(station, d_inner),
                                    to_xy(station + len, d_inner),
                                    to_xy(station + len, d_outer),
                                    to_xy(station, d_outer)});
    }
    left = !left;
    station += uniform(rng, 18.0, 26.0);
    if (station > 95.0) break;
  }
  return s;
}

BenchSummary run_benchmark(const BenchOptions& options) {
  BenchSummary summary;
  summary.count = options.count;
  summary.tasks.resize(options.count);
  if (options.count == 0) return summary;

  std::atomic<int> next{0};
  const int n_threads =
      options.threads > 0
          ? options.threads
          : std::max(1u, std::thread::hardware_concurrency());
  auto worker = [&]() {
    while (true) {
      const int index = next.fetch_add(1);
      if (index >= options.count) break;
      const Scenario scenario = make_bench_task(options.seed, index, options);
      BenchTaskResult& task = summary.tasks[index];
      task.index = index;

      PlanOptions incremental;
      incremental.incremental = true;
      const PlanResult result = plan_scenario(scenario, incremental);
      task.success = result.success;
      task.collision_free = result.collision_free;
      task.curvature_ok = result.curvature_ok;
      task.refine_feasible = result.refine_feasible;
      task.failure_stage = result.failure_stage;
      task.min_clearance = result.min_clearance;
      task.max_abs_kappa = result.max_abs_kappa;
      task.refine_iterations = result.refine_iterations;
      task.timing = result.timing;

      PlanOptions batch;
      batch.incremental = false;
      const PlanResult batch_result = plan_scenario(scenario, batch);
      task.refine_ms_batch = batch_result.timing.refine_ms;
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int successes = 0;
  std::vector<double> esdf, path, speed, refine_inc, refine_batch, total,
      ratios;
  for (const BenchTaskResult& task : summary.tasks) {
    if (task.success) ++successes;
    esdf.push_back(task.timing.esdf_ms);
    path.push_back(task.timing.path_ms);
    speed.push_back(task.timing.speed_ms);
    refine_inc.push_back(task.timing.refine_ms);
    refine_batch.push_back(task.refine_ms_batch);
    total.push_back(task.timing.total_ms);
    if (task.refine_ms_batch > 1e-9) {
      ratios.push_back(task.timing.refine_ms / task.refine_ms_batch);
    }
  }
  summary.success_rate =
      static_cast<double>(successes) / static_cast<double>(options.count);
  summary.esdf = stats_of(esdf);
  summary.path = stats_of(path);
  summary.speed = stats_of(speed);
  summary.refine_incremental = stats_of(refine_inc);
  summary.refine_batch = stats_of(refine_batch);
  summary.total = stats_of(total);
  summary.refine_ratio_median = median_of(ratios);
  return summary;
}

std::string bench_results_json(const BenchSummary& summary) {
  nlohmann::ordered_json j;
  j["count"] = summary.count;
  j["success_rate"] = summary.success_rate;
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const auto& task : summary.tasks) {
    nlohmann::ordered_json t;
    t["index"] = task.index;
    t["success"] = task.success;
    t["collision_free"] = task.collision_free;
    t["curvature_ok"] = task.curvature_ok;
    t["refine_feasible"] = task.refine_feasible;
    t["failure_stage"] = task.failure_stage;
    t["min_clearance"] = task.min_clearance;
    t["max_abs_kappa"] = task.max_abs_kappa;
    t["refine_iterations"] = task.refine_iterations;
    tasks.push_back(t);
  }
  j["tasks"] = tasks;
  return j.dump(1);
}

std::string bench_timing_json(const BenchSummary& summary) {
  nlohmann::ordered_json j;
  auto stage = [](const StageStats& s) {
    nlohmann::ordered_json out;
    out["min_ms"] = s.min_ms;
    out["avg_ms"] = s.avg_ms;
    out["max_ms"] = s.max_ms;
    return out;
  };
  j["esdf"] = stage(summary.esdf);
  j["path"] = stage(summary.path);
  j["speed"] = stage(summary.speed);
  j["refine_incremental"] = stage(summary.refine_incremental);
  j["refine_batch"] = stage(summary.refine_batch);
  j["total"] = stage(summary.total);
  j["refine_ratio_median"] = summary.refine_ratio_median;
  return j.dump(1);
}

std::string bench_table_text(const BenchSummary& summary) {
  std::ostringstream out;
  char line[160];
  out << "tasks: " << summary.count << "  success rate: ";
  std::snprintf(line, sizeof(line), "%.1f%%\n", 100.0 * summary.success_rate);
  out << line;
  out << "stage            min(ms)   avg(ms)   max(ms)\n";
  auto row = [&](const char* name, const StageStats& s) {
    std::snprintf(line, sizeof(line), "%-15s %8.2f  %8.2f  %8.2f\n", name,
                  s.min_ms, s.avg_ms, s.max_ms);
    out << line;
  };
  row("esdf", summary.esdf);
  row("path", summary.path);
  row("speed", summary.speed);
  row("refine (incr)", summary.refine_incremental);
  row("refine (batch)", summary.refine_batch);
  row("total", summary.total);
  std::snprintf(line, sizeof(line), "refine incr/batch median ratio: %.3f\n",
                summary.refine_ratio_median);
  out << line;
  return out.str();
}

}  // namespace gptraj
