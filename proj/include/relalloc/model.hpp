#pragma once

// Domain types shared by every stage of the allocation pipeline: workflow
// tasks, devices, channels, relays and the application criticality policy.
// All quantities are stored in canonical units (seconds, bits, bytes, joules,
// watts); ingestion converts everything else at parse time.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relalloc {

using DeviceIndex = std::size_t;
using TaskIndex = std::size_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a constructor or parser rejects malformed input.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct TaskSpec {
  std::string id;
  double memory = 0.0;       // bytes
  double storage = 0.0;      // bytes
  double output_size = 0.0;  // bits
  std::map<std::string, double> exec_time;      // device id -> seconds
  std::map<std::string, double> power;          // device id -> watts
  std::map<std::string, double> vulnerability;  // device id -> probability
  std::vector<std::string> allowed_devices;
};

struct Device {
  std::string id;
  double memory_budget = 0.0;   // bytes
  double storage_budget = 0.0;  // bytes
  std::optional<double> energy_budget;  // joules, nullopt = unbounded
  double compare_time = 0.0;  // seconds
  double vote_time = 0.0;     // seconds
  double compare_power = 0.0;  // watts
  double vote_power = 0.0;     // watts
  double idle_power = 0.0;
  double max_power = 0.0;

  double compare_energy() const { return compare_time * compare_power; }
  double vote_energy() const { return vote_time * vote_power; }
};

struct Channel {
  std::string from;
  std::string to;
  double bandwidth = 0.0;  // bits / second
  double tx_energy = 0.0;  // joules / bit
  double rx_energy = 0.0;  // joules / bit
};

struct Relay {
  std::string from;
  std::string to;
  std::string via;
};

/// Devices plus the directed channel set. Every ordered device pair must be
/// reachable directly or through exactly one relay device.
class Topology {
 public:
  Topology(std::vector<Device> devices, std::vector<Channel> channels,
           std::vector<Relay> relays = {});

  const std::vector<Device>& devices() const { return devices_; }
  const std::vector<Channel>& channels() const { return channels_; }
  const std::vector<Relay>& relays() const { return relays_; }
  std::size_t size() const { return devices_.size(); }

  const Device& device(DeviceIndex k) const { return devices_.at(k); }
  std::optional<DeviceIndex> find(const std::string& id) const;
  DeviceIndex index_of(const std::string& id) const;

  /// Direct channel k -> l, if any.
  const Channel* channel(DeviceIndex k, DeviceIndex l) const;
  /// Intermediate device for a pair without a direct channel.
  std::optional<DeviceIndex> relay(DeviceIndex k, DeviceIndex l) const;

 private:
  std::vector<Device> devices_;
  std::vector<Channel> channels_;
  std::vector<Relay> relays_;
  std::map<std::string, DeviceIndex> by_id_;
  // dense n*n tables; -1 when absent
  std::vector<int> channel_at_;
  std::vector<int> relay_at_;
};

struct Arc {
  TaskIndex parent;
  TaskIndex child;
};

/// The application task graph. Construction enforces acyclicity, arc
/// well-formedness and per-task parameter completeness; device membership of
/// allowed sets is checked against a topology by validate_workflow.
class WorkflowGraph {
 public:
  WorkflowGraph(std::vector<TaskSpec> tasks,
                std::vector<std::pair<std::string, std::string>> arcs);

  const std::vector<TaskSpec>& tasks() const { return tasks_; }
  const TaskSpec& task(TaskIndex i) const { return tasks_.at(i); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::size_t size() const { return tasks_.size(); }
  TaskIndex index_of(const std::string& id) const;

  std::size_t child_count(TaskIndex i) const { return children_.at(i).size(); }
  const std::vector<TaskIndex>& children(TaskIndex i) const { return children_.at(i); }
  const std::vector<TaskIndex>& parents(TaskIndex i) const { return parents_.at(i); }
  const std::vector<TaskIndex>& topological_order() const { return topo_order_; }

 private:
  std::vector<TaskSpec> tasks_;
  std::vector<Arc> arcs_;
  std::map<std::string, TaskIndex> by_id_;
  std::vector<std::vector<TaskIndex>> children_;
  std::vector<std::vector<TaskIndex>> parents_;
  std::vector<TaskIndex> topo_order_;
};

struct CriticalityPolicy {
  int level = 1;
  int max_level = 1;
  double kappa = 0.06;
  double lambda = 3.0;

  void validate() const;
};

struct Thresholds {
  double dual = 0.0;    // VT_DE
  double triple = 0.0;  // VT_TE
};

Thresholds thresholds(const CriticalityPolicy& policy);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Structural and parametric checks over raw task/arc lists. Never throws;
/// everything wrong is listed in the report.
ValidationReport validate_workflow(
    const std::vector<TaskSpec>& tasks,
    const std::vector<std::pair<std::string, std::string>>& arcs,
    const Topology& topo);

ValidationReport validate_workflow(const WorkflowGraph& graph, const Topology& topo);

}  // namespace relalloc
