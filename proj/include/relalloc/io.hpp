#pragma once

// JSON documents: system (devices, channels, relays), workflow (tasks, arcs),
// scenario (criticality, weights, solver options) and generator specs. Unit
// suffixes on keys say what each number means; values are converted to
// canonical units on parse.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relalloc/bilp.hpp"
#include "relalloc/solver.hpp"
#include "relalloc/synth.hpp"

namespace relalloc {

using nlohmann::json;

/// Task and arc lists as read, before graph construction.
struct WorkflowData {
  std::vector<TaskSpec> tasks;
  std::vector<std::pair<std::string, std::string>> arcs;
};

struct Scenario {
  CriticalityPolicy policy{3, 3, 0.06, 3.0};
  ObjectiveWeights weights;
  SolverOptions solver;
  double sweep_step = 0.05;
};

json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

Topology parse_system(const json& j);
WorkflowData parse_workflow(const json& j);
Scenario parse_scenario(const json& j);
GenSpec parse_genspec(const json& j);

json to_json(const Topology& topo);
json to_json(const WorkflowGraph& wf);
json to_json(const Scenario& s);

json eg_to_json(const ExpandedGraph& eg);
json reg_to_json(const CandidateGraph& reg);
std::string reg_to_dot(const CandidateGraph& reg);

/// Stable JSON text: two-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace relalloc
