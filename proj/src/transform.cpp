#include "relalloc/transform.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace relalloc {

namespace {

std::vector<DeviceIndex> allowed_indices(const TaskSpec& t, const Topology& topo) {
  std::vector<DeviceIndex> q;
  for (const auto& d : t.allowed_devices) q.push_back(topo.index_of(d));
  std::sort(q.begin(), q.end());
  return q;
}

Replica make_replica(int slot, const TaskSpec& t, DeviceIndex n, const Topology& topo) {
  const auto& dev = topo.device(n).id;
  Replica r;
  r.slot = slot;
  r.device = n;
  r.exec_time = t.exec_time.at(dev);
  r.energy = comp_energy(r.exec_time, t.power.at(dev));
  r.vulnerability = t.vulnerability.at(dev);
  r.memory = t.memory;
  r.storage = t.storage;
  return r;
}

// Remote replica devices with their multiplicity, ordered by device index.
std::map<DeviceIndex, int> remote_groups(const CandidateNode& c) {
  std::map<DeviceIndex, int> groups;
  for (const auto& r : c.replicas)
    if (r.device != c.primary) ++groups[r.device];
  return groups;
}

int local_count(const CandidateNode& c) {
  return static_cast<int>(std::count_if(c.replicas.begin(), c.replicas.end(),
                                        [&](const Replica& r) { return r.device == c.primary; }));
}

double check_time(const CandidateNode& c, const Topology& topo) {
  const auto& d = topo.device(c.primary);
  switch (c.mode) {
    case ExecMode::Single: return 0.0;
    case ExecMode::Dual: return d.compare_time;
    case ExecMode::Triple: return d.vote_time;
  }
  return 0.0;
}

double check_energy(const CandidateNode& c, const Topology& topo) {
  const auto& d = topo.device(c.primary);
  switch (c.mode) {
    case ExecMode::Single: return 0.0;
    case ExecMode::Dual: return d.compare_energy();
    case ExecMode::Triple: return d.vote_energy();
  }
  return 0.0;
}

}  // namespace

std::string candidate_id(const std::string& task_id, const std::vector<std::string>& devices) {
  std::string id = task_id + "@";
  for (std::size_t z = 0; z < devices.size(); ++z) {
    if (z) id += ',';
    id += devices[z];
  }
  return id;
}

ExpandedGraph build_eg(const WorkflowGraph& wf, const Topology& topo) {
  auto report = validate_workflow(wf, topo);
  if (!report.ok()) throw ValidationError(report.violations);

  ExpandedGraph eg{wf, topo, {}, {}, {}};
  std::vector<std::vector<DeviceIndex>> q(wf.size());
  eg.task_nodes.resize(wf.size());
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    q[i] = allowed_indices(wf.task(i), topo);
    for (auto k : q[i]) {
      eg.task_nodes[i].push_back(eg.nodes.size());
      eg.nodes.push_back({i, k});
    }
  }
  for (std::size_t a = 0; a < wf.arcs().size(); ++a) {
    const auto& arc = wf.arcs()[a];
    const double bits = wf.task(arc.parent).output_size;
    for (auto k : q[arc.parent]) {
      for (auto l : q[arc.child]) {
        EgArc e;
        e.tg_arc = a;
        e.parent = arc.parent;
        e.child = arc.child;
        e.from = k;
        e.to = l;
        e.route = route(topo, k, l);
        e.latency = comm_latency(bits, e.route, topo);
        e.energy = comm_energy(bits, e.route, topo);
        eg.arcs.push_back(e);
      }
    }
  }
  return eg;
}

double candidate_latency(const CandidateNode& c, const TaskSpec& task, double input_size,
                         const Topology& topo) {
  const auto& primary = c.replicas.front();
  double slowest = local_count(c) * primary.exec_time;
  for (auto [n, count] : remote_groups(c)) {
    const auto it = std::find_if(c.replicas.begin(), c.replicas.end(),
                                 [n = n](const Replica& r) { return r.device == n; });
    const double out_leg = comm_latency(task.output_size, route(topo, n, c.primary), topo);
    const double path = comm_latency(input_size, route(topo, c.primary, n), topo) +
                        count * (it->exec_time + out_leg);
    slowest = std::max(slowest, path);
  }
  return slowest + check_time(c, topo);
}

std::vector<double> candidate_replica_energy(const CandidateNode& c, const TaskSpec& task,
                                             double input_size, const Topology& topo) {
  std::vector<double> out(c.replicas.size(), 0.0);
  double primary = c.replicas.front().energy + check_energy(c, topo);
  for (auto [n, count] : remote_groups(c))
    primary += send_energy(input_size, route(topo, c.primary, n), topo);
  for (std::size_t z = 1; z < c.replicas.size(); ++z) {
    const auto& r = c.replicas[z];
    if (r.device == c.primary) {
      out[z] = r.energy;
      continue;
    }
    const Route to_replica = route(topo, c.primary, r.device);
    const Route back = route(topo, r.device, c.primary);
    primary += receive_energy(task.output_size, back, topo);
    out[z] = receive_energy(input_size, to_replica, topo) + r.energy +
             send_energy(task.output_size, back, topo);
  }
  out[0] = primary;
  return out;
}

double candidate_vulnerability(const CandidateNode& c) {
  double v = 1.0;
  for (const auto& r : c.replicas) v *= r.vulnerability;
  return v;
}

CandidateGraph build_reg(const ExpandedGraph& eg, const CriticalityPolicy& policy) {
  const auto t = thresholds(policy);
  const auto& wf = eg.workflow;
  const auto& topo = eg.topology;

  CandidateGraph reg{wf, topo, policy, eg.nodes, eg.arcs, {}, {}, {}};
  reg.candidates.resize(wf.size());
  reg.sets.resize(wf.size());
  reg.input_size.assign(wf.size(), 0.0);
  for (const auto& arc : wf.arcs()) reg.input_size[arc.child] += wf.task(arc.parent).output_size;

  for (TaskIndex i = 0; i < wf.size(); ++i) {
    const auto& task = wf.task(i);
    std::vector<DeviceIndex> q;
    for (auto node : eg.task_nodes[i]) q.push_back(eg.nodes[node].device);

    auto& cands = reg.candidates[i];
    for (auto k : q) {
      CandidateSet set{k, {}};
      const ExecMode mode = exec_mode(task.vulnerability.at(topo.device(k).id), t);
      std::vector<std::vector<DeviceIndex>> placements;
      switch (mode) {
        case ExecMode::Single: placements.push_back({k}); break;
        case ExecMode::Dual:
          for (auto l : q) placements.push_back({k, l});
          break;
        case ExecMode::Triple:
          for (std::size_t a = 0; a < q.size(); ++a)
            for (std::size_t b = a; b < q.size(); ++b) placements.push_back({k, q[a], q[b]});
          break;
      }
      for (const auto& devices : placements) {
        CandidateNode c;
        c.task = i;
        c.primary = k;
        c.mode = mode;
        std::vector<std::string> names;
        for (std::size_t z = 0; z < devices.size(); ++z) {
          c.replicas.push_back(make_replica(static_cast<int>(z) + 1, task, devices[z], topo));
          names.push_back(topo.device(devices[z]).id);
        }
        c.id = candidate_id(task.id, names);
        c.total_latency = candidate_latency(c, task, reg.input_size[i], topo);
        c.replica_energy = candidate_replica_energy(c, task, reg.input_size[i], topo);
        c.total_vulnerability = candidate_vulnerability(c);
        c.total_reliability = reliability(c.total_vulnerability);
        set.members.push_back(cands.size());
        cands.push_back(std::move(c));
      }
      reg.sets[i].push_back(std::move(set));
    }
  }
  return reg;
}

std::size_t CandidateGraph::candidate_count() const {
  std::size_t n = 0;
  for (const auto& c : candidates) n += c.size();
  return n;
}

std::size_t CandidateGraph::replica_count() const {
  std::size_t n = 0;
  for (const auto& cs : candidates)
    for (const auto& c : cs) n += c.replicas.size();
  return n;
}

const CandidateSet& CandidateGraph::set_of(TaskIndex i, DeviceIndex k) const {
  for (const auto& s : sets.at(i))
    if (s.primary == k) return s;
  throw Error(fmt::format("task {} has no candidate set on device {}", workflow.task(i).id,
                          topology.device(k).id));
}

}  // namespace relalloc
