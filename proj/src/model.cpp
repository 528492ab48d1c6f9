#include "relalloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include <fmt/format.h>

namespace relalloc {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Kahn's algorithm over index arcs; returns an empty order on a cycle.
std::vector<std::size_t> topo_sort(std::size_t n,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& arcs) {
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> indeg(n, 0);
  for (auto [a, b] : arcs) {
    out[a].push_back(b);
    ++indeg[b];
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (auto w : out[v])
      if (--indeg[w] == 0) ready.push_back(w);
  }
  if (order.size() != n) order.clear();
  return order;
}

void check_task_params(const TaskSpec& t, const Topology* topo,
                       std::vector<std::string>& errs) {
  if (t.id.empty()) errs.push_back("task with empty id");
  if (!finite_nonneg(t.memory)) errs.push_back(fmt::format("task {}: negative memory", t.id));
  if (!finite_nonneg(t.storage)) errs.push_back(fmt::format("task {}: negative storage", t.id));
  if (!finite_nonneg(t.output_size))
    errs.push_back(fmt::format("task {}: negative output size", t.id));
  if (t.allowed_devices.empty())
    errs.push_back(fmt::format("task {}: empty allowed device set", t.id));

  std::set<std::string> allowed(t.allowed_devices.begin(), t.allowed_devices.end());
  if (allowed.size() != t.allowed_devices.size())
    errs.push_back(fmt::format("task {}: duplicate allowed device", t.id));

  for (const auto& d : t.allowed_devices) {
    if (topo && !topo->find(d))
      errs.push_back(fmt::format("task {}: unknown device {} in allowed set", t.id, d));
    if (!t.exec_time.count(d))
      errs.push_back(fmt::format("task {}: missing exec_time for device {}", t.id, d));
    if (!t.power.count(d))
      errs.push_back(fmt::format("task {}: missing power for device {}", t.id, d));
    if (!t.vulnerability.count(d))
      errs.push_back(fmt::format("task {}: missing vulnerability for device {}", t.id, d));
  }
  auto extra = [&](const std::map<std::string, double>& m, const char* what) {
    for (const auto& [d, _] : m)
      if (!allowed.count(d))
        errs.push_back(fmt::format("task {}: {} given for device {} outside allowed set", t.id,
                                   what, d));
  };
  extra(t.exec_time, "exec_time");
  extra(t.power, "power");
  extra(t.vulnerability, "vulnerability");

  for (const auto& [d, v] : t.exec_time)
    if (!(std::isfinite(v) && v > 0.0))
      errs.push_back(fmt::format("task {}: exec_time on {} must be > 0", t.id, d));
  for (const auto& [d, v] : t.power)
    if (!finite_nonneg(v)) errs.push_back(fmt::format("task {}: negative power on {}", t.id, d));
  for (const auto& [d, v] : t.vulnerability)
    if (!(v > 0.0 && v < 1.0))
      errs.push_back(fmt::format(
          "task {}: vulnerability out of open interval (0,1) on {}: {}", t.id, d, v));
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

// ---------------------------------------------------------------- Topology

Topology::Topology(std::vector<Device> devices, std::vector<Channel> channels,
                   std::vector<Relay> relays)
    : devices_(std::move(devices)), channels_(std::move(channels)), relays_(std::move(relays)) {
  std::vector<std::string> errs;
  if (devices_.empty()) errs.push_back("topology has no devices");
  for (DeviceIndex k = 0; k < devices_.size(); ++k) {
    const auto& d = devices_[k];
    if (d.id.empty()) errs.push_back("device with empty id");
    if (!by_id_.emplace(d.id, k).second) errs.push_back(fmt::format("duplicate device {}", d.id));
    if (!finite_nonneg(d.memory_budget) || !finite_nonneg(d.storage_budget) ||
        (d.energy_budget && !finite_nonneg(*d.energy_budget)))
      errs.push_back(fmt::format("device {}: budgets must be >= 0", d.id));
    if (!finite_nonneg(d.compare_time) || !finite_nonneg(d.vote_time) ||
        !finite_nonneg(d.compare_power) || !finite_nonneg(d.vote_power))
      errs.push_back(fmt::format("device {}: comparison/voting parameters must be >= 0", d.id));
    if (!(finite_nonneg(d.idle_power) && d.idle_power < d.max_power && std::isfinite(d.max_power)))
      errs.push_back(fmt::format("device {}: requires 0 <= idle_power < max_power", d.id));
  }
  if (!errs.empty()) throw ValidationError(errs);

  const std::size_t n = devices_.size();
  channel_at_.assign(n * n, -1);
  relay_at_.assign(n * n, -1);
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const auto& ch = channels_[c];
    auto k = find(ch.from);
    auto l = find(ch.to);
    if (!k || !l) {
      errs.push_back(fmt::format("channel {}->{} references unknown device", ch.from, ch.to));
      continue;
    }
    if (*k == *l) errs.push_back(fmt::format("channel {}->{} is a self-loop", ch.from, ch.to));
    if (!(std::isfinite(ch.bandwidth) && ch.bandwidth > 0.0))
      errs.push_back(fmt::format("channel {}->{}: bandwidth must be > 0", ch.from, ch.to));
    if (!finite_nonneg(ch.tx_energy) || !finite_nonneg(ch.rx_energy))
      errs.push_back(fmt::format("channel {}->{}: tx/rx energy must be >= 0", ch.from, ch.to));
    int& slot = channel_at_[*k * n + *l];
    if (slot >= 0) errs.push_back(fmt::format("duplicate channel {}->{}", ch.from, ch.to));
    slot = static_cast<int>(c);
  }
  for (const auto& r : relays_) {
    auto k = find(r.from);
    auto l = find(r.to);
    auto o = find(r.via);
    if (!k || !l || !o) {
      errs.push_back(fmt::format("relay {}->{} via {} references unknown device", r.from, r.to,
                                 r.via));
      continue;
    }
    if (channel_at_[*k * n + *l] >= 0) {
      errs.push_back(fmt::format("relay {}->{} given but a direct channel exists", r.from, r.to));
      continue;
    }
    if (channel_at_[*k * n + *o] < 0 || channel_at_[*o * n + *l] < 0)
      errs.push_back(fmt::format("relay {}->{} via {} lacks a direct leg", r.from, r.to, r.via));
    int& slot = relay_at_[*k * n + *l];
    if (slot >= 0) errs.push_back(fmt::format("duplicate relay for {}->{}", r.from, r.to));
    slot = static_cast<int>(*o);
  }
  for (DeviceIndex k = 0; k < n; ++k)
    for (DeviceIndex l = 0; l < n; ++l)
      if (k != l && channel_at_[k * n + l] < 0 && relay_at_[k * n + l] < 0)
        errs.push_back(fmt::format("devices {} and {} are not connected", devices_[k].id,
                                   devices_[l].id));
  if (!errs.empty()) throw ValidationError(errs);
}

std::optional<DeviceIndex> Topology::find(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

DeviceIndex Topology::index_of(const std::string& id) const {
  auto k = find(id);
  if (!k) throw Error("unknown device " + id);
  return *k;
}

const Channel* Topology::channel(DeviceIndex k, DeviceIndex l) const {
  int c = channel_at_.at(k * devices_.size() + l);
  return c < 0 ? nullptr : &channels_[static_cast<std::size_t>(c)];
}

std::optional<DeviceIndex> Topology::relay(DeviceIndex k, DeviceIndex l) const {
  int o = relay_at_.at(k * devices_.size() + l);
  if (o < 0) return std::nullopt;
  return static_cast<DeviceIndex>(o);
}

// ----------------------------------------------------------- WorkflowGraph

WorkflowGraph::WorkflowGraph(std::vector<TaskSpec> tasks,
                             std::vector<std::pair<std::string, std::string>> arcs)
    : tasks_(std::move(tasks)) {
  std::vector<std::string> errs;
  for (TaskIndex i = 0; i < tasks_.size(); ++i) {
    check_task_params(tasks_[i], nullptr, errs);
    if (!by_id_.emplace(tasks_[i].id, i).second)
      errs.push_back(fmt::format("duplicate task id {}", tasks_[i].id));
  }
  std::set<std::pair<TaskIndex, TaskIndex>> seen;
  for (const auto& [a, b] : arcs) {
    auto ia = by_id_.find(a);
    auto ib = by_id_.find(b);
    if (ia == by_id_.end() || ib == by_id_.end()) {
      errs.push_back(fmt::format("arc {}->{} references unknown task", a, b));
      continue;
    }
    if (ia->second == ib->second) {
      errs.push_back(fmt::format("self-arc on {}", a));
      continue;
    }
    if (!seen.insert({ia->second, ib->second}).second) {
      errs.push_back(fmt::format("duplicate arc {}->{}", a, b));
      continue;
    }
    arcs_.push_back({ia->second, ib->second});
  }
  if (!errs.empty()) throw ValidationError(errs);

  children_.assign(tasks_.size(), {});
  parents_.assign(tasks_.size(), {});
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (const auto& arc : arcs_) {
    children_[arc.parent].push_back(arc.child);
    parents_[arc.child].push_back(arc.parent);
    idx.emplace_back(arc.parent, arc.child);
  }
  topo_order_ = topo_sort(tasks_.size(), idx);
  if (topo_order_.size() != tasks_.size()) throw ValidationError({"cycle in workflow graph"});
}

TaskIndex WorkflowGraph::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error("unknown task " + id);
  return it->second;
}

// -------------------------------------------------------------- Criticality

void CriticalityPolicy::validate() const {
  std::vector<std::string> errs;
  if (max_level < 1) errs.push_back("max criticality level must be >= 1");
  if (level < 1 || level > max_level)
    errs.push_back(fmt::format("criticality level {} outside 1..{}", level, max_level));
  if (!(kappa > 0.0) || !std::isfinite(kappa)) errs.push_back("kappa must be > 0");
  if (!(lambda > 1.0) || !std::isfinite(lambda)) errs.push_back("lambda must be > 1");
  if (!errs.empty()) throw ValidationError(errs);
}

Thresholds thresholds(const CriticalityPolicy& policy) {
  policy.validate();
  const double dual = policy.kappa / static_cast<double>(policy.level);
  return {dual, policy.lambda * dual};
}

// --------------------------------------------------------------- Validation

ValidationReport validate_workflow(
    const std::vector<TaskSpec>& tasks,
    const std::vector<std::pair<std::string, std::string>>& arcs, const Topology& topo) {
  ValidationReport report;
  auto& errs = report.violations;
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    check_task_params(tasks[i], &topo, errs);
    if (!ids.emplace(tasks[i].id, i).second)
      errs.push_back(fmt::format("duplicate task id {}", tasks[i].id));
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (const auto& [a, b] : arcs) {
    auto ia = ids.find(a);
    auto ib = ids.find(b);
    if (ia == ids.end() || ib == ids.end()) {
      errs.push_back(fmt::format("arc {}->{} references unknown task", a, b));
      continue;
    }
    if (ia->second == ib->second) {
      errs.push_back(fmt::format("cycle: self-arc on {}", a));
      continue;
    }
    if (!seen.insert({ia->second, ib->second}).second) {
      errs.push_back(fmt::format("duplicate arc {}->{}", a, b));
      continue;
    }
    idx.emplace_back(ia->second, ib->second);
  }
  if (!tasks.empty() && topo_sort(tasks.size(), idx).empty())
    errs.push_back("cycle in workflow graph");
  return report;
}

ValidationReport validate_workflow(const WorkflowGraph& graph, const Topology& topo) {
  std::vector<std::pair<std::string, std::string>> arcs;
  for (const auto& a : graph.arcs())
    arcs.emplace_back(graph.task(a.parent).id, graph.task(a.child).id);
  return validate_workflow(graph.tasks(), arcs, topo);
}

}  // namespace relalloc
