#pragma once

// Two-step graph expansion. The task graph first becomes the expanded graph
// (one node per eligible task/device placement, one arc per placement pair of
// every task arc). Each expanded node then becomes a set of candidate nodes,
// one per admissible replica placement under the node's execution mode.

#include <string>
#include <vector>

#include "relalloc/model.hpp"
#include "relalloc/params.hpp"

namespace relalloc {

struct EgNode {
  TaskIndex task = 0;
  DeviceIndex device = 0;
};

struct EgArc {
  std::size_t tg_arc = 0;  // index into WorkflowGraph::arcs()
  TaskIndex parent = 0;
  TaskIndex child = 0;
  DeviceIndex from = 0;  // primary device of parent
  DeviceIndex to = 0;    // primary device of child
  Route route;
  double latency = 0.0;  // seconds to ship the parent's output
  double energy = 0.0;   // joules over the whole path
};

struct ExpandedGraph {
  WorkflowGraph workflow;
  Topology topology;
  std::vector<EgNode> nodes;
  std::vector<EgArc> arcs;
  // per task, indices into `nodes`, ordered by device index
  std::vector<std::vector<std::size_t>> task_nodes;
};

/// Builds the expanded graph. The workflow must pass validate_workflow against
/// the topology; unresolvable routes throw.
ExpandedGraph build_eg(const WorkflowGraph& wf, const Topology& topo);

struct Replica {
  int slot = 1;  // 1 = primary, 2/3 = redundant executions
  DeviceIndex device = 0;
  double exec_time = 0.0;
  double energy = 0.0;  // computational energy L*P on this device
  double vulnerability = 0.0;
  double memory = 0.0;
  double storage = 0.0;
};

struct CandidateNode {
  TaskIndex task = 0;
  DeviceIndex primary = 0;
  ExecMode mode = ExecMode::Single;
  std::vector<Replica> replicas;     // slot order; remote pair canonical by device index
  double total_latency = 0.0;        // seconds
  std::vector<double> replica_energy;  // joules, indexed by slot - 1
  double total_vulnerability = 0.0;
  double total_reliability = 0.0;
  std::string id;  // "<task>@<slot1 device>,<slot2 device>,..."
};

struct CandidateSet {
  DeviceIndex primary = 0;
  std::vector<std::size_t> members;  // indices into the task's candidate list
};

struct CandidateGraph {
  WorkflowGraph workflow;
  Topology topology;
  CriticalityPolicy policy;
  std::vector<EgNode> eg_nodes;
  std::vector<EgArc> arcs;
  // per task: candidates ordered by (primary device, replica devices)
  std::vector<std::vector<CandidateNode>> candidates;
  // per task: one set per eligible primary device, by device index
  std::vector<std::vector<CandidateSet>> sets;
  std::vector<double> input_size;  // bits received by each task from its parents

  std::size_t candidate_count() const;
  std::size_t replica_count() const;
  const CandidateSet& set_of(TaskIndex i, DeviceIndex k) const;
};

CandidateGraph build_reg(const ExpandedGraph& eg, const CriticalityPolicy& policy);

/// Total time to run a candidate's executions plus the shipping of inputs and
/// outputs between the primary device and remote replicas, plus compare/vote.
double candidate_latency(const CandidateNode& c, const TaskSpec& task, double input_size,
                         const Topology& topo);

/// Per-slot device energy, indexed by slot - 1.
std::vector<double> candidate_replica_energy(const CandidateNode& c, const TaskSpec& task,
                                             double input_size, const Topology& topo);

double candidate_vulnerability(const CandidateNode& c);

std::string candidate_id(const std::string& task_id, const std::vector<std::string>& devices);

}  // namespace relalloc
