#include "relalloc/oracle.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace relalloc {

ChoiceEvaluation evaluate_choice(const CandidateGraph& reg, const Topology& topo,
                                 const std::vector<std::size_t>& choice) {
  const auto& wf = reg.workflow;
  if (choice.size() != wf.size())
    throw Error(fmt::format("choice covers {} tasks, workflow has {}", choice.size(), wf.size()));
  const std::size_t u = topo.size();
  ChoiceEvaluation e;
  e.memory.assign(u, 0.0);
  e.storage.assign(u, 0.0);
  e.energy.assign(u, 0.0);

  std::vector<DeviceIndex> primary(wf.size());
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    const auto& c = reg.candidates.at(i).at(choice[i]);
    primary[i] = c.primary;
    double v = 1.0;
    for (std::size_t z = 0; z < c.replicas.size(); ++z) {
      const auto& r = c.replicas[z];
      v *= r.vulnerability;
      e.memory[r.device] += r.memory;
      e.storage[r.device] += r.storage;
      e.energy[r.device] += c.replica_energy[z];
    }
    e.reliability *= 1.0 - v;
    e.f_lat += c.total_latency;
  }
  for (const auto& arc : wf.arcs()) {
    const double bits = wf.task(arc.parent).output_size;
    const DeviceIndex k = primary[arc.parent];
    const DeviceIndex l = primary[arc.child];
    if (k == l) continue;
    if (const Channel* ch = topo.channel(k, l)) {
      e.f_lat += bits / ch->bandwidth;
      e.energy[k] += bits * ch->tx_energy;
      e.energy[l] += bits * ch->rx_energy;
      continue;
    }
    const auto via = topo.relay(k, l);
    if (!via) throw Error("unrouted device pair");
    const Channel* first = topo.channel(k, *via);
    const Channel* second = topo.channel(*via, l);
    e.f_lat += bits / first->bandwidth + bits / second->bandwidth;
    e.energy[k] += bits * first->tx_energy;
    e.energy[*via] += bits * (first->rx_energy + second->tx_energy);
    e.energy[l] += bits * second->rx_energy;
  }
  e.f_rel = std::log(e.reliability);

  auto over = [](double used, double budget) {
    return used > budget + 1e-9 * std::max(1.0, std::abs(budget));
  };
  for (DeviceIndex n = 0; n < u; ++n) {
    const auto& d = topo.device(n);
    if (over(e.memory[n], d.memory_budget))
      e.violations.push_back(fmt::format("memory on {}: {} > {}", d.id, e.memory[n], d.memory_budget));
    if (over(e.storage[n], d.storage_budget))
      e.violations.push_back(
          fmt::format("storage on {}: {} > {}", d.id, e.storage[n], d.storage_budget));
    if (d.energy_budget && over(e.energy[n], *d.energy_budget))
      e.violations.push_back(
          fmt::format("energy on {}: {} > {}", d.id, e.energy[n], *d.energy_budget));
  }
  return e;
}

double direct_g(const ChoiceEvaluation& e, const NormalizationBounds& b, const ObjectiveWeights& w) {
  double g = 0.0;
  if (b.rel_max > b.rel_min) g += w.rel * (e.f_rel - b.rel_min) / (b.rel_max - b.rel_min);
  if (b.lat_max > b.lat_min) g -= w.lat * (e.f_lat - b.lat_min) / (b.lat_max - b.lat_min);
  return g;
}

OracleResult brute_force(const CandidateGraph& reg, const Topology& topo,
                         const NormalizationBounds& bounds, const ObjectiveWeights& w) {
  const std::size_t n = reg.candidates.size();
  double total = 1.0;
  for (const auto& c : reg.candidates) total *= static_cast<double>(c.size());
  if (total > static_cast<double>(kEnumerationGuard))
    throw Error(fmt::format("{} choices exceed the enumeration guard of {}", total,
                            kEnumerationGuard));

  OracleResult res;
  const double inf = std::numeric_limits<double>::infinity();
  res.extremes = {inf, -inf, inf, -inf};
  std::vector<std::size_t> choice(n, 0);
  auto advance = [&] {
    for (std::size_t t = n; t-- > 0;) {
      if (++choice[t] < reg.candidates[t].size()) return true;
      choice[t] = 0;
    }
    return false;
  };
  do {
    ++res.enumerated_count;
    const auto e = evaluate_choice(reg, topo, choice);
    if (!e.feasible()) continue;
    res.extremes.rel_min = std::min(res.extremes.rel_min, e.f_rel);
    res.extremes.rel_max = std::max(res.extremes.rel_max, e.f_rel);
    res.extremes.lat_min = std::min(res.extremes.lat_min, e.f_lat);
    res.extremes.lat_max = std::max(res.extremes.lat_max, e.f_lat);
    const double g = direct_g(e, bounds, w);
    // enumeration is lexicographic, so an equal value never replaces
    const double tol = 1e-11 * std::max(1.0, std::abs(res.best_g));
    if (res.feasible_count++ == 0 || g > res.best_g + tol) {
      res.best_choice = choice;
      res.best_g = g;
    }
  } while (advance());
  if (res.feasible_count == 0) res.extremes = {};
  return res;
}

MonteCarloEstimate monte_carlo_reliability(const std::vector<std::vector<double>>& replicas,
                                           std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ValidationError({"samples must be >= 1"});
  std::mt19937_64 rng(seed);
  // 53-bit uniform in [0, 1), independent of the standard library's distributions
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::size_t ok = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    bool run_ok = true;
    for (const auto& task : replicas) {
      bool task_ok = false;
      for (double v : task)
        if (uniform() >= v) task_ok = true;
      if (!task_ok) {
        run_ok = false;
        break;
      }
    }
    ok += run_ok;
  }
  MonteCarloEstimate m;
  m.samples = samples;
  m.seed = seed;
  m.estimate = static_cast<double>(ok) / static_cast<double>(samples);
  m.std_error = std::sqrt(m.estimate * (1.0 - m.estimate) / static_cast<double>(samples));
  return m;
}

}  // namespace relalloc
