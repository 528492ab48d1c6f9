#include "relalloc/bilp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "relalloc/solver.hpp"

namespace relalloc {

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::Candidate: return "candidate";
    case VarKind::Arc: return "arc";
    case VarKind::Replica: return "replica";
    case VarKind::Set: return "set";
  }
  return "?";
}

// ---------------------------------------------------------------- catalog

VariableCatalog::VariableCatalog(std::vector<Variable> vars) : vars_(std::move(vars)) {
  std::size_t tasks = 0;
  for (const auto& v : vars_) {
    tasks = std::max(tasks, v.task + 1);
    if (v.kind == VarKind::Arc) tasks = std::max(tasks, v.child_task + 1);
  }
  candidate_vars_.assign(tasks, {});
  replica_vars_.assign(tasks, {});
  set_vars_.assign(tasks, {});

  for (std::size_t v = 0; v < vars_.size(); ++v) {
    const auto& var = vars_[v];
    if (!by_name_.emplace(var.name, v).second)
      throw Error(fmt::format("duplicate variable name {}", var.name));
    switch (var.kind) {
      case VarKind::Candidate: {
        auto& list = candidate_vars_[var.task];
        if (list.size() <= var.candidate) list.resize(var.candidate + 1, SIZE_MAX);
        list[var.candidate] = v;
        break;
      }
      case VarKind::Replica: {
        auto& per_cand = replica_vars_[var.task];
        if (per_cand.size() <= var.candidate) per_cand.resize(var.candidate + 1);
        auto& slots = per_cand[var.candidate];
        const auto z = static_cast<std::size_t>(var.slot);
        if (z == 0) throw Error(fmt::format("replica variable {} has slot 0", var.name));
        if (slots.size() < z) slots.resize(z, SIZE_MAX);
        slots[z - 1] = v;
        break;
      }
      case VarKind::Set:
        if (!set_vars_[var.task].emplace(var.device, v).second)
          throw Error(fmt::format("duplicate set variable for task {}", var.task));
        break;
      case VarKind::Arc: arc_vars_.push_back(v); break;
    }
  }
  for (std::size_t i = 0; i < tasks; ++i) {
    for (auto v : candidate_vars_[i])
      if (v == SIZE_MAX) throw Error(fmt::format("task {} has a gap in candidate numbering", i));
    replica_vars_[i].resize(candidate_vars_[i].size());
    for (const auto& slots : replica_vars_[i])
      for (auto v : slots)
        if (v == SIZE_MAX) throw Error(fmt::format("task {} has a gap in replica slots", i));
  }
}

std::size_t VariableCatalog::count(VarKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.kind == kind; }));
}

std::optional<std::size_t> VariableCatalog::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> VariableCatalog::set_var(TaskIndex i, DeviceIndex k) const {
  const auto& m = set_vars_.at(i);
  auto it = m.find(k);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string column_name(char prefix, std::size_t n) { return fmt::format("{}{:07}", prefix, n); }

class RowBuilder {
 public:
  explicit RowBuilder(std::vector<LinearConstraint>& rows) : rows_(rows) {}

  // Merges duplicate variables and drops zeros; rows left empty are skipped.
  void add(const char* family, SparseRow terms, Sense sense, double rhs, std::string tag) {
    std::sort(terms.begin(), terms.end());
    SparseRow merged;
    for (const auto& [v, c] : terms) {
      if (!merged.empty() && merged.back().first == v)
        merged.back().second += c;
      else
        merged.emplace_back(v, c);
    }
    std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
    if (merged.empty()) return;
    auto& n = counters_[family];
    ++n;
    rows_.push_back({std::move(merged), sense, rhs, fmt::format("{}{:06}", family, n),
                     std::move(tag)});
  }

 private:
  std::vector<LinearConstraint>& rows_;
  std::map<std::string, std::size_t> counters_;
};

std::string arc_label(const CandidateGraph& reg, const EgArc& a) {
  const auto& wf = reg.workflow;
  const auto& topo = reg.topology;
  return fmt::format("{}@{}->{}@{}", wf.task(a.parent).id, topo.device(a.from).id,
                     wf.task(a.child).id, topo.device(a.to).id);
}

}  // namespace

VariableCatalog build_catalog(const CandidateGraph& reg) {
  std::vector<Variable> vars;
  const auto& wf = reg.workflow;
  const auto& topo = reg.topology;
  std::size_t nx = 0, nr = 0, ns = 0, na = 0;

  for (TaskIndex i = 0; i < wf.size(); ++i) {
    for (std::size_t c = 0; c < reg.candidates[i].size(); ++c) {
      const auto& cand = reg.candidates[i][c];
      Variable v;
      v.kind = VarKind::Candidate;
      v.name = column_name('X', ++nx);
      v.label = cand.id;
      v.task = i;
      v.candidate = c;
      v.device = cand.primary;
      vars.push_back(v);
    }
  }
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    for (std::size_t c = 0; c < reg.candidates[i].size(); ++c) {
      const auto& cand = reg.candidates[i][c];
      for (const auto& r : cand.replicas) {
        Variable v;
        v.kind = VarKind::Replica;
        v.name = column_name('R', ++nr);
        v.label = fmt::format("{}#{}@{}", cand.id, r.slot, topo.device(r.device).id);
        v.task = i;
        v.candidate = c;
        v.slot = r.slot;
        v.device = r.device;
        vars.push_back(v);
      }
    }
  }
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    for (const auto& s : reg.sets[i]) {
      Variable v;
      v.kind = VarKind::Set;
      v.name = column_name('S', ++ns);
      v.label = fmt::format("{}@{}", wf.task(i).id, topo.device(s.primary).id);
      v.task = i;
      v.device = s.primary;
      vars.push_back(v);
    }
  }
  for (std::size_t a = 0; a < reg.arcs.size(); ++a) {
    const auto& arc = reg.arcs[a];
    Variable v;
    v.kind = VarKind::Arc;
    v.name = column_name('A', ++na);
    v.label = arc_label(reg, arc);
    v.task = arc.parent;
    v.child_task = arc.child;
    v.device = arc.from;
    v.to_device = arc.to;
    v.arc = a;
    vars.push_back(v);
  }
  return VariableCatalog(std::move(vars));
}

SparseRow objective_reliability(const CandidateGraph& reg, const VariableCatalog& catalog) {
  SparseRow row;
  for (TaskIndex i = 0; i < reg.candidates.size(); ++i)
    for (std::size_t c = 0; c < reg.candidates[i].size(); ++c)
      row.emplace_back(catalog.candidate_var(i, c),
                       std::log(reg.candidates[i][c].total_reliability));
  std::sort(row.begin(), row.end());
  return row;
}

SparseRow objective_latency(const CandidateGraph& reg, const VariableCatalog& catalog) {
  SparseRow row;
  for (TaskIndex i = 0; i < reg.candidates.size(); ++i)
    for (std::size_t c = 0; c < reg.candidates[i].size(); ++c)
      row.emplace_back(catalog.candidate_var(i, c), reg.candidates[i][c].total_latency);
  const auto& arcs = catalog.arc_vars();
  for (auto v : arcs) {
    const double cl = reg.arcs[catalog.at(v).arc].latency;
    if (cl != 0.0) row.emplace_back(v, cl);
  }
  std::sort(row.begin(), row.end());
  return row;
}

BilpModel assemble_constraints(const CandidateGraph& reg) {
  BilpModel model;
  model.catalog = build_catalog(reg);
  model.metadata.criticality_level = reg.policy.level;
  const auto& cat = model.catalog;
  const auto& wf = reg.workflow;
  const auto& topo = reg.topology;
  RowBuilder rows(model.constraints);

  // one candidate per task
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    SparseRow t;
    for (auto v : cat.candidates_of(i)) t.emplace_back(v, 1.0);
    rows.add("CH", t, Sense::Equal, 1.0, fmt::format("eq34 task={}", wf.task(i).id));
  }
  // set variable equals the sum of its members
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    for (const auto& s : reg.sets[i]) {
      SparseRow t{{*cat.set_var(i, s.primary), 1.0}};
      for (auto c : s.members) t.emplace_back(cat.candidate_var(i, c), -1.0);
      rows.add("SL", t, Sense::Equal, 0.0,
               fmt::format("eq35 task={} device={}", wf.task(i).id, topo.device(s.primary).id));
    }
  }
  // |N| x_cand = sum of its replica variables
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    for (std::size_t c = 0; c < reg.candidates[i].size(); ++c) {
      const auto& reps = cat.replicas_of(i, c);
      SparseRow t{{cat.candidate_var(i, c), static_cast<double>(reps.size())}};
      for (auto v : reps) t.emplace_back(v, -1.0);
      rows.add("RP", t, Sense::Equal, 0.0,
               fmt::format("eq36 candidate={}", reg.candidates[i][c].id));
    }
  }
  // selected outgoing arcs equal the child count
  std::vector<SparseRow> out_arcs(wf.size());
  for (auto v : cat.arc_vars()) out_arcs[cat.at(v).task].emplace_back(v, 1.0);
  for (TaskIndex i = 0; i < wf.size(); ++i)
    rows.add("OD", out_arcs[i], Sense::Equal, static_cast<double>(wf.child_count(i)),
             fmt::format("eq39 task={}", wf.task(i).id));
  // arc = AND(parent set, child set)
  for (auto v : cat.arc_vars()) {
    const auto& var = cat.at(v);
    const auto src = *cat.set_var(var.task, var.device);
    const auto dst = *cat.set_var(var.child_task, var.to_device);
    rows.add("A1", {{v, 1.0}, {src, -1.0}}, Sense::LessEqual, 0.0,
             fmt::format("eq40 arc={}", var.label));
    rows.add("A2", {{v, 1.0}, {dst, -1.0}}, Sense::LessEqual, 0.0,
             fmt::format("eq41 arc={}", var.label));
    rows.add("A3", {{v, 1.0}, {src, -1.0}, {dst, -1.0}}, Sense::GreaterEqual, -1.0,
             fmt::format("eq42 arc={}", var.label));
  }

  // per-device budgets
  const std::size_t nd = topo.size();
  std::vector<SparseRow> mem(nd), sto(nd), energy(nd);
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    for (std::size_t c = 0; c < reg.candidates[i].size(); ++c) {
      const auto& cand = reg.candidates[i][c];
      const auto& reps = cat.replicas_of(i, c);
      for (std::size_t z = 0; z < cand.replicas.size(); ++z) {
        const auto n = cand.replicas[z].device;
        mem[n].emplace_back(reps[z], cand.replicas[z].memory);
        sto[n].emplace_back(reps[z], cand.replicas[z].storage);
        energy[n].emplace_back(reps[z], cand.replica_energy[z]);
      }
    }
  }
  for (auto v : cat.arc_vars()) {
    const auto& arc = reg.arcs[cat.at(v).arc];
    if (arc.route.kind == RouteKind::SameDevice) continue;
    const double bits = wf.task(arc.parent).output_size;
    energy[arc.from].emplace_back(v, send_energy(bits, arc.route, topo));
    energy[arc.to].emplace_back(v, receive_energy(bits, arc.route, topo));
    if (arc.route.kind == RouteKind::Relayed)
      energy[arc.route.via].emplace_back(v, relay_energy(bits, arc.route, topo));
  }
  for (DeviceIndex n = 0; n < nd; ++n) {
    const auto& dev = topo.device(n);
    rows.add("MM", mem[n], Sense::LessEqual, dev.memory_budget,
             fmt::format("eq43-memory device={}", dev.id));
    rows.add("ST", sto[n], Sense::LessEqual, dev.storage_budget,
             fmt::format("eq43-storage device={}", dev.id));
    if (dev.energy_budget)
      rows.add("EN", energy[n], Sense::LessEqual, *dev.energy_budget,
               fmt::format("eq43-energy device={}", dev.id));
  }

  model.reliability_terms = objective_reliability(reg, cat);
  model.latency_terms = objective_latency(reg, cat);
  return model;
}

std::size_t BilpModel::count_rows(const std::string& tag_prefix) const {
  return static_cast<std::size_t>(
      std::count_if(constraints.begin(), constraints.end(),
                    [&](const LinearConstraint& r) { return r.tag.rfind(tag_prefix, 0) == 0; }));
}

double evaluate(const SparseRow& row, const std::vector<std::uint8_t>& values) {
  double s = 0.0;
  for (const auto& [v, c] : row)
    if (values.at(v)) s += c;
  return s;
}

// ------------------------------------------------------------ objectives

void ObjectiveWeights::validate() const {
  if (!(rel >= 0.0 && rel <= 1.0 && lat >= 0.0 && lat <= 1.0))
    throw ValidationError({fmt::format("weights must lie in [0,1]: ({}, {})", rel, lat)});
  if (std::abs(rel + lat - 1.0) > 1e-12)
    throw ValidationError({fmt::format("weights must sum to 1: {} + {}", rel, lat)});
}

double normalize(double value, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return (value - lo) / (hi - lo);
}

NormalizationBounds normalization_bounds(const BilpModel& model, const SolverOptions& opts) {
  auto optimum = [&](const SparseRow& terms, double sign) {
    BilpModel m = model;
    m.objective = terms;
    for (auto& t : m.objective) t.second *= sign;
    m.objective_offset = 0.0;
    const Solution s = solve_builtin(m, opts);
    if (s.status == SolveStatus::Infeasible) throw InfeasibleError("constraint set is infeasible");
    if (s.status != SolveStatus::Optimal)
      throw Error("normalization solve did not reach optimality within the time limit");
    return evaluate(terms, s.values);
  };
  NormalizationBounds b;
  b.rel_max = optimum(model.reliability_terms, 1.0);
  b.rel_min = optimum(model.reliability_terms, -1.0);
  b.lat_max = optimum(model.latency_terms, 1.0);
  b.lat_min = optimum(model.latency_terms, -1.0);
  return b;
}

BilpModel weighted_objective(BilpModel model, const NormalizationBounds& bounds,
                             const ObjectiveWeights& w) {
  w.validate();
  const double rel_span = bounds.rel_max - bounds.rel_min;
  const double lat_span = bounds.lat_max - bounds.lat_min;
  SparseRow obj;
  double offset = 0.0;
  if (rel_span > 0.0 && w.rel != 0.0) {
    for (const auto& [v, c] : model.reliability_terms) obj.emplace_back(v, w.rel * c / rel_span);
    offset -= w.rel * bounds.rel_min / rel_span;
  }
  if (lat_span > 0.0 && w.lat != 0.0) {
    for (const auto& [v, c] : model.latency_terms) obj.emplace_back(v, -w.lat * c / lat_span);
    offset += w.lat * bounds.lat_min / lat_span;
  }
  std::sort(obj.begin(), obj.end());
  SparseRow merged;
  for (const auto& [v, c] : obj) {
    if (!merged.empty() && merged.back().first == v)
      merged.back().second += c;
    else
      merged.emplace_back(v, c);
  }
  std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
  model.objective = std::move(merged);
  model.objective_offset = offset;
  model.metadata.weights = w;
  model.metadata.bounds = bounds;
  return model;
}

}  // namespace relalloc
