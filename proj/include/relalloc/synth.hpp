#pragma once

// Synthetic workflow generation: DAG skeletons of serial, parallel or mixed
// shape, then per-task parameters scaled from edge-device measurements by
// benchmark performance ratios.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relalloc/model.hpp"

namespace relalloc {

enum class Structure { Serial, Parallel, Mixed };

const char* to_string(Structure s);
Structure parse_structure(const std::string& s);

/// Values measured on the edge device, sampled with replacement.
struct ValuePools {
  std::vector<double> exec_time_edge;  // seconds
  std::vector<double> power_edge;      // watts
  std::vector<double> memory;          // bytes
  std::vector<double> storage;         // bytes
  std::vector<double> output_size;     // bits
};

/// Target share of SE / DE / TE placements on a device, in percent.
struct ModeShare {
  double se = 0.0;
  double de = 0.0;
  double te = 0.0;
};

struct GenSpec {
  Structure structure = Structure::Serial;
  std::size_t task_count = 10;
  int in_degree = 2;
  int out_degree = 2;
  double fixed_pct_edge = 0.0;
  double fixed_pct_hub = 0.0;
  std::uint64_t seed = 1;
  // (theta_hub, theta_cloud) pairs
  std::vector<std::pair<double, double>> perf_ratios;
  ValuePools pools;
  // edge, hub, cloud device ids, slowest first
  std::vector<std::string> tiers{"e", "h", "c"};
  std::map<std::string, ModeShare> mode_share;
  // vulnerabilities are drawn against the thresholds of this policy
  CriticalityPolicy policy{3, 3, 0.06, 3.0};
  double min_vulnerability = 0.001;
  double max_vulnerability = 0.2;

  void validate() const;
};

/// Defaults: performance ratios of the reference benchmark table, pools from
/// the bundled UAV inspection workflow, per-device mode shares for the
/// highest criticality level.
GenSpec default_genspec();

struct Skeleton {
  std::size_t task_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;  // parent < child
};

Skeleton generate_structure(const GenSpec& spec);

/// Device power clamped into (idle, max] by the adjustment factor omega.
double clamp_power(double watts, double idle, double max, double omega);

/// Splits `total` items into integer quotas proportional to `percent`
/// (largest remainder, earlier entries win ties).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& percent);

WorkflowGraph synthesize_parameters(const Skeleton& skeleton, const GenSpec& spec,
                                    const Topology& topo);

/// Pins round(pct * n / 100) random tasks to the edge device and as many to
/// the hub, halves rounded away from zero.
WorkflowGraph assign_fixed_allocations(const WorkflowGraph& graph, const std::string& edge,
                                       const std::string& hub, double pct_edge, double pct_hub,
                                       std::uint64_t seed);

/// Skeleton, parameters and fixed allocations in one go.
WorkflowGraph generate_workflow(const GenSpec& spec, const Topology& topo);

}  // namespace relalloc
