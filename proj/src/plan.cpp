#include "relalloc/plan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>

namespace relalloc {

namespace {

bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

json bounds_json(const NormalizationBounds& b) {
  return {{"rel_min", b.rel_min}, {"rel_max", b.rel_max}, {"lat_min", b.lat_min}, {"lat_max", b.lat_max}};
}

}  // namespace

Problem build_problem(const Topology& topo, const WorkflowData& data, const Scenario& scenario) {
  auto report = validate_workflow(data.tasks, data.arcs, topo);
  if (!report.ok()) throw ValidationError(report.violations);
  scenario.policy.validate();
  WorkflowGraph wf(data.tasks, data.arcs);
  auto eg = build_eg(wf, topo);
  auto reg = build_reg(eg, scenario.policy);
  auto model = assemble_constraints(reg);
  model.metadata.criticality_level = scenario.policy.level;
  return Problem{topo, std::move(wf), scenario, std::move(eg), std::move(reg), std::move(model)};
}

AllocationPlan build_plan(const CandidateGraph& reg, const Solution& sol,
                          const NormalizationBounds& bounds, const ObjectiveWeights& w) {
  AllocationPlan plan;
  plan.status = sol.status;
  plan.bounds = bounds;
  plan.weights = w;
  plan.nodes = sol.nodes;
  plan.bound = sol.bound;
  if (sol.choice.size() != reg.workflow.size()) return plan;

  const auto& topo = reg.topology;
  const auto& wf = reg.workflow;
  plan.choice = sol.choice;
  const auto e = evaluate_choice(reg, topo, sol.choice);
  plan.f_rel = e.f_rel;
  plan.reliability = e.reliability;
  plan.f_lat = e.f_lat;
  plan.f_rel_norm = normalize(e.f_rel, bounds.rel_min, bounds.rel_max);
  plan.f_lat_norm = normalize(e.f_lat, bounds.lat_min, bounds.lat_max);
  plan.g = direct_g(e, bounds, w);

  std::vector<std::size_t> placements(topo.size(), 0);
  std::size_t total = 0;
  for (const auto& d : topo.devices())
    for (const auto& r : topo.devices()) plan.replica_placement[d.id][r.id] = 0;
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    const auto& c = reg.candidates[i][sol.choice[i]];
    TaskAllocation a;
    a.task = wf.task(i).id;
    a.candidate = c.id;
    a.mode = to_string(c.mode);
    a.primary = topo.device(c.primary).id;
    a.reliability = c.total_reliability;
    a.latency = c.total_latency;
    for (std::size_t z = 0; z < c.replicas.size(); ++z) {
      const auto dev = c.replicas[z].device;
      ++placements[dev];
      ++total;
      if (z > 0) {
        a.replicas.push_back(topo.device(dev).id);
        ++plan.replica_placement[a.primary][topo.device(dev).id];
      }
    }
    plan.tasks.push_back(std::move(a));
  }
  for (const auto& arc : wf.arcs()) {
    const auto k = reg.candidates[arc.parent][sol.choice[arc.parent]].primary;
    const auto l = reg.candidates[arc.child][sol.choice[arc.child]].primary;
    plan.arcs.push_back(fmt::format("{}@{}->{}@{}", wf.task(arc.parent).id, topo.device(k).id,
                                    wf.task(arc.child).id, topo.device(l).id));
  }
  for (DeviceIndex n = 0; n < topo.size(); ++n) {
    const auto& d = topo.device(n);
    DeviceUsage u;
    u.device = d.id;
    u.memory = e.memory[n];
    u.memory_budget = d.memory_budget;
    u.storage = e.storage[n];
    u.storage_budget = d.storage_budget;
    u.energy = e.energy[n];
    u.energy_budget = d.energy_budget;
    u.placements = placements[n];
    u.placement_pct = total ? 100.0 * static_cast<double>(placements[n]) / static_cast<double>(total) : 0.0;
    plan.devices.push_back(u);
  }
  return plan;
}

json plan_to_json(const AllocationPlan& plan) {
  json tasks = json::array();
  for (const auto& t : plan.tasks)
    tasks.push_back({{"task", t.task},
                     {"candidate", t.candidate},
                     {"mode", t.mode},
                     {"primary", t.primary},
                     {"replicas", t.replicas},
                     {"reliability", t.reliability},
                     {"latency_s", t.latency}});
  json devices = json::array();
  for (const auto& d : plan.devices)
    devices.push_back({{"device", d.device},
                       {"memory_bytes", d.memory},
                       {"memory_budget_bytes", d.memory_budget},
                       {"storage_bytes", d.storage},
                       {"storage_budget_bytes", d.storage_budget},
                       {"energy_j", d.energy},
                       {"energy_budget_j", d.energy_budget ? json(*d.energy_budget) : json(nullptr)},
                       {"placements", d.placements},
                       {"placement_pct", d.placement_pct}});
  const bool solved = !plan.choice.empty() || plan.status == SolveStatus::Optimal;
  return {{"status", to_string(plan.status)},
          {"weights", {{"w_rel", plan.weights.rel}, {"w_lat", plan.weights.lat}}},
          {"bounds", bounds_json(plan.bounds)},
          {"objectives",
           solved ? json{{"f_rel", plan.f_rel},
                         {"reliability", plan.reliability},
                         {"f_lat", plan.f_lat},
                         {"f_rel_norm", plan.f_rel_norm},
                         {"f_lat_norm", plan.f_lat_norm},
                         {"g", plan.g}}
                  : json(nullptr)},
          {"search_nodes", plan.nodes},
          {"tasks", tasks},
          {"arcs", plan.arcs},
          {"devices", devices},
          {"replica_placement", plan.replica_placement}};
}

std::string plan_table(const AllocationPlan& plan) {
  std::string out = fmt::format("status {}  w_rel {}  w_lat {}\n", to_string(plan.status),
                                plan.weights.rel, plan.weights.lat);
  if (plan.choice.empty()) return out;
  out += fmt::format("{:<10} {:<4} {:<8} {:<10} {:>12} {:>12}\n", "task", "mode", "primary",
                     "replicas", "reliability", "latency_s");
  for (const auto& t : plan.tasks) {
    std::string reps;
    for (const auto& r : t.replicas) reps += (reps.empty() ? "" : ",") + r;
    out += fmt::format("{:<10} {:<4} {:<8} {:<10} {:>12.6f} {:>12.6f}\n", t.task, t.mode, t.primary,
                       reps.empty() ? "-" : reps, t.reliability, t.latency);
  }
  out += fmt::format("reliability {:.6f} (f_rel {:.6f}, normalized {:.4f})\n", plan.reliability,
                     plan.f_rel, plan.f_rel_norm);
  out += fmt::format("latency {:.6f} s (normalized {:.4f})\n", plan.f_lat, plan.f_lat_norm);
  out += fmt::format("g {:.6f}\n", plan.g);
  out += fmt::format("{:<8} {:>8} {:>14} {:>14} {:>14}\n", "device", "tasks%", "memory_MiB",
                     "storage_MiB", "energy_J");
  for (const auto& d : plan.devices)
    out += fmt::format("{:<8} {:>8.2f} {:>14.2f} {:>14.2f} {:>14.4f}\n", d.device, d.placement_pct,
                       d.memory / 1048576.0, d.storage / 1048576.0, d.energy);
  return out;
}

std::vector<std::size_t> plan_choice(const json& plan, const CandidateGraph& reg) {
  const auto& wf = reg.workflow;
  std::vector<std::size_t> choice(wf.size(), SIZE_MAX);
  std::vector<std::string> errs;
  if (!plan.contains("tasks") || !plan["tasks"].is_array()) throw ValidationError({"plan has no task list"});
  for (const auto& t : plan["tasks"]) {
    const std::string task = t.value("task", "");
    const std::string cand = t.value("candidate", "");
    std::optional<TaskIndex> i;
    for (TaskIndex k = 0; k < wf.size(); ++k)
      if (wf.task(k).id == task) i = k;
    if (!i) {
      errs.push_back(fmt::format("plan names unknown task '{}'", task));
      continue;
    }
    const auto& cands = reg.candidates[*i];
    auto it = std::find_if(cands.begin(), cands.end(), [&](const CandidateNode& c) { return c.id == cand; });
    if (it == cands.end()) {
      errs.push_back(fmt::format("task {}: unknown candidate '{}'", task, cand));
      continue;
    }
    if (choice[*i] != SIZE_MAX) errs.push_back(fmt::format("task {} listed twice", task));
    choice[*i] = static_cast<std::size_t>(it - cands.begin());
  }
  for (TaskIndex k = 0; k < wf.size(); ++k)
    if (choice[k] == SIZE_MAX && errs.empty()) errs.push_back(fmt::format("task {} missing from plan", wf.task(k).id));
  if (!errs.empty()) throw ValidationError(errs);
  return choice;
}

std::vector<std::vector<double>> replica_vulnerabilities(const CandidateGraph& reg,
                                                         const std::vector<std::size_t>& choice) {
  std::vector<std::vector<double>> out;
  for (TaskIndex i = 0; i < choice.size(); ++i) {
    std::vector<double> v;
    for (const auto& r : reg.candidates.at(i).at(choice[i]).replicas) v.push_back(r.vulnerability);
    out.push_back(std::move(v));
  }
  return out;
}

SolveOutcome solve_problem(const Problem& p, const ObjectiveWeights& w,
                           const std::optional<NormalizationBounds>& bounds) {
  w.validate();
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  out.bounds = bounds ? *bounds : normalization_bounds(p.model, p.scenario.solver);
  out.model = weighted_objective(p.model, out.bounds, w);
  out.solution = solve_builtin(out.model, p.scenario.solver);
  out.plan = build_plan(p.reg, out.solution, out.bounds, w);
  out.plan.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<double> weight_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ValidationError({"sweep step must lie in (0,1]"});
  std::vector<double> grid;
  const double n = std::round(1.0 / step);
  if (std::abs(n * step - 1.0) < 1e-9) {
    for (double k = 0; k <= n; ++k) grid.push_back(k / n);
  } else {
    for (double k = 0; k * step <= 1.0 + 1e-12; ++k) grid.push_back(std::min(1.0, k * step));
    if (grid.back() < 1.0) grid.push_back(1.0);
  }
  return grid;
}

SweepResult run_sweep(const Problem& p, double step, unsigned workers) {
  const auto grid = weight_grid(step);
  SweepResult res;
  res.bounds = normalization_bounds(p.model, p.scenario.solver);
  for (const auto& d : p.topology.devices()) res.devices.push_back(d.id);
  res.rows.resize(grid.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r; (r = next++) < grid.size();) {
      const ObjectiveWeights w{grid[r], 1.0 - grid[r]};
      res.rows[r] = solve_problem(p, w, res.bounds).plan;
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(grid.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return res;
}

std::string sweep_csv(const SweepResult& s) {
  std::string out = "w_rel,w_lat,status,f_rel,reliability,f_lat,f_rel_norm,f_lat_norm,g";
  for (const auto& d : s.devices) out += ",pct_" + d;
  for (const auto& p : s.devices)
    for (const auto& r : s.devices) out += fmt::format(",replicas_{}_{}", p, r);
  out += '\n';
  for (const auto& row : s.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}", row.weights.rel, row.weights.lat, to_string(row.status),
                       row.f_rel, row.reliability, row.f_lat, row.f_rel_norm, row.f_lat_norm, row.g);
    for (const auto& d : row.devices) out += fmt::format(",{}", d.placement_pct);
    for (const auto& p : s.devices)
      for (const auto& r : s.devices) {
        auto it = row.replica_placement.find(p);
        out += fmt::format(",{}", it == row.replica_placement.end() ? 0 : it->second.at(r));
      }
    out += '\n';
  }
  return out;
}

json sweep_to_json(const SweepResult& s) {
  json rows = json::array();
  for (const auto& row : s.rows) rows.push_back(plan_to_json(row));
  return {{"bounds", bounds_json(s.bounds)}, {"devices", s.devices}, {"rows", rows}};
}

BaselineReport run_baselines(const Topology& topo, const WorkflowData& data, const Scenario& scenario) {
  BaselineReport report;
  const auto full = build_problem(topo, data, scenario);
  const auto optimum = solve_problem(full, scenario.weights);
  report.optimum = optimum.plan;

  for (const auto& dev : topo.devices()) {
    BaselineResult b;
    b.device = dev.id;
    WorkflowData restricted = data;
    for (auto& t : restricted.tasks) {
      if (t.allowed_devices.size() <= 1) continue;
      if (std::find(t.allowed_devices.begin(), t.allowed_devices.end(), dev.id) == t.allowed_devices.end()) {
        b.reason = fmt::format("task {} cannot run on {}", t.id, dev.id);
        break;
      }
      t.allowed_devices = {dev.id};
      for (auto* m : {&t.exec_time, &t.power, &t.vulnerability}) {
        const double keep = m->at(dev.id);
        m->clear();
        (*m)[dev.id] = keep;
      }
    }
    if (b.reason.empty()) {
      const auto p = build_problem(topo, restricted, scenario);
      const auto model = weighted_objective(p.model, optimum.bounds, scenario.weights);
      const auto sol = solve_builtin(model, scenario.solver);
      b.plan = build_plan(p.reg, sol, optimum.bounds, scenario.weights);
      b.feasible = sol.status == SolveStatus::Optimal;
      if (sol.status == SolveStatus::Infeasible) b.reason = "resource budgets cannot be met";
      if (sol.status == SolveStatus::TimeLimit) b.reason = "time limit reached";
    }
    report.baselines.push_back(std::move(b));
  }
  return report;
}

json baseline_to_json(const BaselineReport& r) {
  auto summary = [](const AllocationPlan& p) {
    return json{{"status", to_string(p.status)},
                {"reliability", p.reliability},
                {"f_rel", p.f_rel},
                {"f_lat", p.f_lat},
                {"f_rel_norm", p.f_rel_norm},
                {"f_lat_norm", p.f_lat_norm},
                {"g", p.g}};
  };
  json rows = json::array();
  for (const auto& b : r.baselines) {
    json j = {{"device", b.device}, {"feasible", b.feasible}};
    if (b.feasible) {
      j["result"] = summary(b.plan);
      j["reliability_gain_pct"] = b.plan.reliability > 0.0
                                      ? 100.0 * (r.optimum.reliability - b.plan.reliability) / b.plan.reliability
                                      : 0.0;
      j["latency_reduction_pct"] =
          b.plan.f_lat > 0.0 ? 100.0 * (b.plan.f_lat - r.optimum.f_lat) / b.plan.f_lat : 0.0;
    } else {
      j["reason"] = b.reason;
    }
    rows.push_back(std::move(j));
  }
  return {{"weights", {{"w_rel", r.optimum.weights.rel}, {"w_lat", r.optimum.weights.lat}}},
          {"bounds", bounds_json(r.optimum.bounds)},
          {"optimum", summary(r.optimum)},
          {"baselines", rows}};
}

PlanCheck validate_plan(const Problem& p, const json& plan, std::size_t samples, std::uint64_t seed) {
  PlanCheck c;
  const auto choice = plan_choice(plan, p.reg);

  const auto values = expand_choice(p.model.catalog, choice);
  for (const auto& v : verify(p.model, values).violations)
    c.problems.push_back(fmt::format("row {} ({}) violated: lhs {} vs rhs {}", v.row, v.tag, v.lhs, v.rhs));

  c.evaluation = evaluate_choice(p.reg, p.topology, choice);
  for (const auto& v : c.evaluation.violations) c.problems.push_back(v);

  NormalizationBounds b;
  ObjectiveWeights w;
  try {
    const auto& jb = plan.at("bounds");
    b = {jb.at("rel_min"), jb.at("rel_max"), jb.at("lat_min"), jb.at("lat_max")};
    w = {plan.at("weights").at("w_rel"), plan.at("weights").at("w_lat")};
  } catch (const json::exception& e) {
    throw ValidationError({fmt::format("plan: {}", e.what())});
  }
  c.g = direct_g(c.evaluation, b, w);
  if (const auto& o = plan.value("objectives", json()); o.is_object()) {
    auto check = [&](const char* key, double actual) {
      if (!o.contains(key)) return;
      const double reported = o[key].get<double>();
      if (!close(reported, actual))
        c.problems.push_back(fmt::format("{} reported as {} but recomputes to {}", key, reported, actual));
    };
    check("f_rel", c.evaluation.f_rel);
    check("reliability", c.evaluation.reliability);
    check("f_lat", c.evaluation.f_lat);
    check("g", c.g);
  }

  c.monte_carlo = monte_carlo_reliability(replica_vulnerabilities(p.reg, choice), samples, seed);
  const double r = c.evaluation.reliability;
  const double se = std::sqrt(r * (1.0 - r) / static_cast<double>(samples));
  if (std::abs(c.monte_carlo.estimate - r) > 3.0 * se)
    c.problems.push_back(fmt::format("Monte Carlo estimate {} is more than 3 standard errors from {}",
                                     c.monte_carlo.estimate, r));

  double combos = 1.0;
  for (const auto& cs : p.reg.candidates) combos *= static_cast<double>(cs.size());
  if (combos <= static_cast<double>(kEnumerationGuard)) {
    c.oracle = brute_force(p.reg, p.topology, b, w);
    if (c.oracle->feasible() && c.oracle->best_g > c.g + 1e-9 * std::max(1.0, std::abs(c.g)))
      c.problems.push_back(fmt::format("plan g {} is below the enumerated optimum {}", c.g, c.oracle->best_g));
  }
  return c;
}

json check_to_json(const PlanCheck& c) {
  json j = {{"ok", c.ok()},
            {"problems", c.problems},
            {"recomputed",
             {{"f_rel", c.evaluation.f_rel},
              {"reliability", c.evaluation.reliability},
              {"f_lat", c.evaluation.f_lat},
              {"g", c.g}}},
            {"monte_carlo",
             {{"estimate", c.monte_carlo.estimate},
              {"std_error", c.monte_carlo.std_error},
              {"samples", c.monte_carlo.samples},
              {"seed", c.monte_carlo.seed}}}};
  if (c.oracle)
    j["oracle"] = {{"best_g", c.oracle->best_g},
                   {"feasible_count", c.oracle->feasible_count},
                   {"enumerated_count", c.oracle->enumerated_count}};
  else
    j["oracle"] = nullptr;
  return j;
}

}  // namespace relalloc
