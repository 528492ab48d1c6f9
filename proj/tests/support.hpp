#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "relalloc/io.hpp"
#include "relalloc/oracle.hpp"
#include "relalloc/plan.hpp"
#include "relalloc/solver.hpp"
#include "relalloc/transform.hpp"

namespace testing {

using namespace relalloc;

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(RELALLOC_FIXTURE_DIR) / name;
}

inline Topology load_system(const std::string& name = "system.json") {
  return parse_system(read_json(fixture(name)));
}

inline WorkflowData load_workflow(const std::string& name) {
  return parse_workflow(read_json(fixture(name)));
}

inline Scenario load_scenario(const std::string& name = "scenario.json") {
  return parse_scenario(read_json(fixture(name)));
}

inline Problem load_problem(const std::string& workflow, const std::string& system = "system.json") {
  return build_problem(load_system(system), load_workflow(workflow), load_scenario());
}

inline Device make_device(const std::string& id, double memory = 1e12, double storage = 1e12,
                          std::optional<double> energy = std::nullopt) {
  Device d;
  d.id = id;
  d.memory_budget = memory;
  d.storage_budget = storage;
  d.energy_budget = energy;
  d.compare_time = 1e-6;
  d.vote_time = 1.5e-6;
  d.compare_power = 1.2;
  d.vote_power = 1.3;
  d.idle_power = 1.0;
  d.max_power = 50.0;
  return d;
}

// Fully connected topology with identical 10 Mbit/s channels.
inline Topology mesh(const std::vector<Device>& devices) {
  std::vector<Channel> ch;
  for (const auto& a : devices)
    for (const auto& b : devices)
      if (a.id != b.id) ch.push_back({a.id, b.id, 10e6, 1e-6, 0.5e-6});
  return Topology(devices, ch);
}

inline TaskSpec task(const std::string& id, const std::map<std::string, double>& exec,
                     const std::map<std::string, double>& vuln, double output_bits = 1e6,
                     double memory = 1 << 20) {
  TaskSpec t;
  t.id = id;
  t.memory = memory;
  t.storage = memory / 2;
  t.output_size = output_bits;
  for (const auto& [dev, l] : exec) {
    t.allowed_devices.push_back(dev);
    t.exec_time[dev] = l;
    t.power[dev] = 2.0;
  }
  t.vulnerability = vuln;
  return t;
}

struct Built {
  ExpandedGraph eg;
  CandidateGraph reg;
  BilpModel model;
};

inline Built build(const WorkflowGraph& wf, const Topology& topo, const CriticalityPolicy& policy) {
  auto eg = build_eg(wf, topo);
  auto reg = build_reg(eg, policy);
  auto model = assemble_constraints(reg);
  return {std::move(eg), std::move(reg), std::move(model)};
}

struct Instance {
  Topology topology;
  WorkflowGraph workflow;
  CriticalityPolicy policy;
  ObjectiveWeights weights;
};

inline std::size_t choice_space(const CandidateGraph& reg) {
  std::size_t n = 1;
  for (const auto& c : reg.candidates) n *= c.size();
  return n;
}

// Random instance with up to six tasks on the reference three-device system.
// With `tight`, memory and energy budgets are cut so that some placements
// overflow them.
inline Instance random_instance(std::uint64_t seed, bool tight, std::size_t max_space = 60000) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::vector<std::string> ids{"e", "h", "c"};

  for (;;) {
    const auto base = load_system();
    std::vector<Device> devices = base.devices();
    const std::size_t n = 2 + pick(5);
    CriticalityPolicy policy{static_cast<int>(1 + pick(3)), 3, 0.06, 3.0};
    const auto th = thresholds(policy);

    std::vector<TaskSpec> tasks;
    double total_memory = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      TaskSpec t;
      t.id = "T" + std::to_string(i + 1);
      t.memory = std::floor(uni(16, 128)) * 1048576.0;
      t.storage = std::floor(uni(4, 64)) * 1048576.0;
      t.output_size = uni(0.1, 5.0) * 1e6;
      total_memory += t.memory;
      unsigned mask = 0;
      while (mask == 0) mask = static_cast<unsigned>(rng() % 8);
      const double le = uni(0.05, 0.5);
      const double lh = le / uni(4.0, 9.0);
      const double lc = lh / uni(4.0, 9.0);
      const double time[3] = {le, lh, lc};
      const double power[3] = {uni(1.3, 4.4), uni(9.0, 40.0), uni(80.0, 800.0)};
      for (std::size_t k = 0; k < 3; ++k) {
        if (!(mask & (1u << k))) continue;
        t.allowed_devices.push_back(ids[k]);
        t.exec_time[ids[k]] = time[k];
        t.power[ids[k]] = power[k];
        double v = 0.0;
        switch (pick(7)) {
          case 0: v = th.dual; break;
          case 1: v = th.triple; break;
          case 2: case 3: v = uni(0.001, th.dual); break;
          case 4: v = uni(th.dual, th.triple); break;
          default: v = uni(th.triple, std::min(0.5, th.triple + 0.15)); break;
        }
        t.vulnerability[ids[k]] = v;
      }
      tasks.push_back(std::move(t));
    }
    std::vector<std::pair<std::string, std::string>> arcs;
    for (std::size_t j = 1; j < n; ++j)
      for (std::size_t i = 0; i < j; ++i)
        if (pick(3) == 0 || (i + 1 == j && pick(2) == 0)) arcs.emplace_back(tasks[i].id, tasks[j].id);

    if (tight) {
      devices[0].memory_budget = total_memory * uni(0.4, 1.2);
      devices[1].memory_budget = total_memory * uni(0.6, 1.5);
      devices[0].energy_budget = uni(0.5, 3.0);
      devices[1].energy_budget = uni(2.0, 20.0);
    }
    Topology topo(devices, base.channels(), base.relays());
    WorkflowGraph wf(tasks, arcs);
    const auto reg = build_reg(build_eg(wf, topo), policy);
    if (choice_space(reg) > max_space) continue;
    const double wr = static_cast<double>(pick(21)) / 20.0;
    return {topo, wf, policy, {wr, 1.0 - wr}};
  }
}

}  // namespace testing
