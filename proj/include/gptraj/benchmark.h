#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gptraj/pipeline.h"
#include "gptraj/scenario.h"

namespace gptraj {

struct BenchOptions {
  int count = 200;
  std::uint64_t seed = 1;
  int min_obstacles = 1;
  int max_obstacles = 3;
  double corridor_min = 3.0;
  double corridor_max = 4.5;
  double speed_min = 6.0;
  double speed_max = 10.0;
  int threads = 0;  // 0 = hardware concurrency
};

struct BenchTaskResult {
  int index = 0;
  bool success = false;
  bool collision_free = false;
  bool curvature_ok = false;
  bool refine_feasible = false;
  std::string failure_stage;
  double min_clearance = 0.0;
  double max_abs_kappa = 0.0;
  int refine_iterations = 0;
  StageTiming timing;        // incremental run
  double refine_ms_batch = 0.0;
};

struct StageStats {
  double min_ms = 0.0;
  double avg_ms = 0.0;
  double max_ms = 0.0;
};

struct BenchSummary {
  int count = 0;
  double success_rate = 0.0;
  StageStats esdf, path, speed, refine_incremental, refine_batch, total;
  double refine_ratio_median = 0.0;  // incremental / batch wall time
  std::vector<BenchTaskResult> tasks;
};

/// Deterministic task generator: straight or gently curved reference, a
/// narrow corridor, and 1..3 obstacles protruding from alternating sides with
/// a feasible gap left open.
Scenario make_bench_task(std::uint64_t seed, int index,
                         const BenchOptions& options);

/// Runs the tasks over a worker pool (results independent of thread count),
/// each task once with incremental refinement and once with full re-solves.
BenchSummary run_benchmark(const BenchOptions& options);

/// Deterministic metrics (success flags, clearances); no wall times.
std::string bench_results_json(const BenchSummary& summary);
std::string bench_timing_json(const BenchSummary& summary);
/// Per-stage min/avg/max table, one row per statistic.
std::string bench_table_text(const BenchSummary& summary);

}  // namespace gptraj
