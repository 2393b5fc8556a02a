#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gptraj/benchmark.h"
#include "gptraj/pipeline.h"
#include "gptraj/render.h"
#include "gptraj/scenario.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPlanningFailure = 2;
constexpr int kExitInvalidInput = 3;

bool verbose() {
  const char* env = std::getenv("GPTRAJ_LOG");
  return env != nullptr && std::string(env) != "0" && std::string(env) != "";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

int run_plan(const std::string& scenario_path, const std::string& out_dir,
             bool svg, bool non_incremental, bool dump_esdf) {
  std::vector<std::string> errors;
  auto scenario = gptraj::load_scenario(scenario_path, &errors);
  if (scenario.has_value()) {
    const auto problems = gptraj::validate_scenario(*scenario);
    errors.insert(errors.end(), problems.begin(), problems.end());
  }
  if (!scenario.has_value() || !errors.empty()) {
    for (const auto& e : errors) std::cerr << "invalid scenario: " << e << "\n";
    return kExitInvalidInput;
  }

  gptraj::PlanOptions options;
  options.incremental = !non_incremental;
  const gptraj::PlanResult result = gptraj::plan_scenario(*scenario, options);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file(dir / "result.json", gptraj::result_to_json(result));
  write_file(dir / "timing.json", gptraj::timing_to_json(result));
  if (svg) {
    write_file(dir / "plan.svg", gptraj::render_plan_svg(result, *scenario));
    write_file(dir / "st_graph.svg", gptraj::render_st_svg(result));
    write_file(dir / "lat_acc.svg",
               gptraj::render_alat_svg(result, scenario->limits.a_lat_max));
  }
  if (dump_esdf && result.esdf) {
    result.esdf->write_pgm((dir / "esdf.pgm").string());
  }

  if (verbose()) {
    std::cerr << "plan: success=" << result.success
              << " stage=" << result.failure_stage
              << " clearance=" << result.min_clearance
              << " max|kappa|=" << result.max_abs_kappa
              << " max|a_lat|=" << result.max_abs_a_lat
              << " total_ms=" << result.timing.total_ms << "\n";
  }
  if (!result.failure_stage.empty() || !result.success) {
    std::cerr << "planning failed"
              << (result.failure_stage.empty()
                      ? std::string(" (quality checks)")
                      : " at stage " + result.failure_stage)
              << (result.error.empty() ? "" : ": " + result.error) << "\n";
    return kExitPlanningFailure;
  }
  std::cout << "ok: trajectory with " << result.trajectory.size()
            << " samples written to " << out_dir << "\n";
  return kExitOk;
}

int run_bench(const gptraj::BenchOptions& options, const std::string& out_dir) {
  const gptraj::BenchSummary summary = gptraj::run_benchmark(options);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file(dir / "bench_results.json", gptraj::bench_results_json(summary));
  write_file(dir / "bench_timing.json", gptraj::bench_timing_json(summary));
  const std::string table = gptraj::bench_table_text(summary);
  write_file(dir / "bench_table.txt", table);
  std::cout << table;
  return kExitOk;
}

int run_validate(const std::string& scenario_path) {
  std::vector<std::string> errors;
  auto scenario = gptraj::load_scenario(scenario_path, &errors);
  if (scenario.has_value()) {
    const auto problems = gptraj::validate_scenario(*scenario);
    errors.insert(errors.end(), problems.begin(), problems.end());
  }
  if (!scenario.has_value() || !errors.empty()) {
    for (const auto& e : errors) std::cerr << "invalid scenario: " << e << "\n";
    return kExitInvalidInput;
  }
  std::cout << "scenario ok\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frenet-frame trajectory planner"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  bool svg = false;
  bool non_incremental = false;
  bool dump_esdf = false;

  CLI::App* plan = app.add_subcommand("plan", "plan one scenario");
  plan->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  plan->add_option("--out", out_dir, "output directory");
  plan->add_flag("--svg", svg, "write SVG plots");
  plan->add_flag("--non-incremental", non_incremental,
                 "full path re-solve in each refinement iteration");
  plan->add_flag("--dump-esdf", dump_esdf, "write the distance field as PGM");

  gptraj::BenchOptions bench_options;
  std::string bench_out = "bench_out";
  std::uint64_t seed = 1;
  CLI::App* bench = app.add_subcommand("bench", "run random planning tasks");
  bench->add_option("--count", bench_options.count, "number of tasks");
  bench->add_option("--seed", seed, "random seed");
  bench->add_option("--min-obstacles", bench_options.min_obstacles, "");
  bench->add_option("--max-obstacles", bench_options.max_obstacles, "");
  bench->add_option("--corridor-min", bench_options.corridor_min, "");
  bench->add_option("--corridor-max", bench_options.corridor_max, "");
  bench->add_option("--speed-min", bench_options.speed_min, "");
  bench->add_option("--speed-max", bench_options.speed_max, "");
  bench->add_option("--threads", bench_options.threads, "0 = hardware");
  bench->add_option("--out", bench_out, "output directory");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "schema-check a scenario");
  validate->add_option("--scenario", validate_path, "scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  if (plan->parsed()) {
    return run_plan(scenario_path, out_dir, svg, non_incremental, dump_esdf);
  }
  if (bench->parsed()) {
    bench_options.seed = seed;
    return run_bench(bench_options, bench_out);
  }
  if (validate->parsed()) {
    return run_validate(validate_path);
  }
  return kExitInvalidInput;
}
