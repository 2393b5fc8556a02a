#pragma once

#include <string>

#include "gptraj/pipeline.h"

namespace gptraj {

/// Top-down x-y view: reference line, corridor, obstacles, agents, planned
/// trajectory. Deterministic bytes for identical input.
std::string render_plan_svg(const PlanResult& result, const Scenario& scenario);

/// s-t graph: blocked regions, explored search nodes, coarse chain, smoothed
/// profile. Renders bare axes when the graph is empty.
std::string render_st_svg(const PlanResult& result);

/// Lateral acceleration vs time per refinement iteration.
std::string render_alat_svg(const PlanResult& result, double a_lat_max);

/// Planning output as JSON text; excludes wall-clock times so identical
/// scenarios produce identical bytes.
std::string result_to_json(const PlanResult& result);

/// Wall-clock times of the run (separate file; not byte-stable).
std::string timing_to_json(const PlanResult& result);

}  // namespace gptraj
