#include "relalloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "relalloc/params.hpp"

namespace relalloc {

namespace {

constexpr double kMiB = 1024.0 * 1024.0;
constexpr double kMbit = 1e6;

// Own sampling helpers: std distributions differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(g_() % n); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 g_;
};

std::uint64_t stream(std::uint64_t seed, std::uint64_t k) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (k + 1));
}

Skeleton serial(const GenSpec& spec) {
  Skeleton s{spec.task_count, {}};
  const auto span = static_cast<std::size_t>(std::min(spec.in_degree, spec.out_degree));
  for (std::size_t i = 0; i < spec.task_count; ++i)
    for (std::size_t d = 1; d <= span && i + d < spec.task_count; ++d) s.arcs.emplace_back(i, i + d);
  return s;
}

Skeleton parallel(const GenSpec& spec, Rng& rng) {
  const std::size_t n = spec.task_count;
  const auto od = static_cast<std::size_t>(spec.out_degree);
  const auto id = static_cast<std::size_t>(spec.in_degree);
  Skeleton s{n, {}};
  std::vector<std::size_t> out(n, 0), in(n, 0);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  auto link = [&](std::size_t a, std::size_t b) {
    s.arcs.emplace_back(a, b);
    seen.emplace(a, b);
    ++out[a];
    ++in[b];
  };
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < i; ++j)
      if (out[j] < od) open.push_back(j);
    link(rng.pick(open), i);
  }
  // join arcs between branches
  const auto extra = static_cast<std::size_t>(std::lround(0.25 * static_cast<double>(n)));
  std::size_t added = 0;
  for (std::size_t attempt = 0; attempt < 20 * extra && added < extra; ++attempt) {
    std::size_t a = rng.below(n), b = rng.below(n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (out[a] >= od || in[b] >= id || seen.count({a, b})) continue;
    link(a, b);
    ++added;
  }
  std::sort(s.arcs.begin(), s.arcs.end());
  return s;
}

Skeleton mixed(const GenSpec& spec, Rng& rng) {
  const std::size_t n = spec.task_count;
  Skeleton s{n, {}};
  std::size_t next = 1;
  std::size_t tail = 0;
  bool fan = false;
  while (next < n) {
    if (!fan) {
      const std::size_t len = std::min<std::size_t>(1 + rng.below(3), n - next);
      for (std::size_t z = 0; z < len; ++z) {
        s.arcs.emplace_back(tail, next);
        tail = next++;
      }
    } else {
      const std::size_t width =
          std::min<std::size_t>(static_cast<std::size_t>(spec.out_degree), n - next);
      std::vector<std::size_t> branches;
      for (std::size_t z = 0; z < width; ++z) {
        s.arcs.emplace_back(tail, next);
        branches.push_back(next++);
      }
      if (next < n && branches.size() > 1) {
        const std::size_t join = next++;
        const std::size_t fan_in =
            std::min(branches.size(), static_cast<std::size_t>(spec.in_degree));
        for (std::size_t z = 0; z < fan_in; ++z) s.arcs.emplace_back(branches[z], join);
        tail = join;
      } else if (!branches.empty()) {
        tail = branches.front();
      }
    }
    fan = !fan;
  }
  std::sort(s.arcs.begin(), s.arcs.end());
  return s;
}

}  // namespace

const char* to_string(Structure s) {
  switch (s) {
    case Structure::Serial: return "serial";
    case Structure::Parallel: return "parallel";
    case Structure::Mixed: return "mixed";
  }
  return "?";
}

Structure parse_structure(const std::string& s) {
  if (s == "serial" || s == "S") return Structure::Serial;
  if (s == "parallel" || s == "P") return Structure::Parallel;
  if (s == "mixed" || s == "M") return Structure::Mixed;
  throw ValidationError({fmt::format("unknown structure '{}'", s)});
}

void GenSpec::validate() const {
  std::vector<std::string> v;
  if (task_count < 1) v.push_back("task_count must be >= 1");
  if (in_degree < 1 || out_degree < 1) v.push_back("degree bounds must be >= 1");
  for (double p : {fixed_pct_edge, fixed_pct_hub})
    if (!(p >= 0.0 && p <= 100.0)) v.push_back(fmt::format("percentage {} outside [0,100]", p));
  if (fixed_pct_edge + fixed_pct_hub > 100.0) v.push_back("fixed percentages exceed 100");
  if (perf_ratios.empty()) v.push_back("perf_ratios is empty");
  for (const auto& [h, c] : perf_ratios)
    if (!(h > 0.0 && c > 0.0)) v.push_back("performance ratios must be positive");
  for (const auto* pool : {&pools.exec_time_edge, &pools.power_edge, &pools.memory,
                           &pools.storage, &pools.output_size})
    if (pool->empty()) v.push_back("value pools must be non-empty");
  if (tiers.size() != 3) v.push_back("tiers must list edge, hub and cloud device ids");
  for (const auto& t : tiers)
    if (!mode_share.count(t)) v.push_back(fmt::format("no mode share for device {}", t));
  const auto th = thresholds(policy);
  if (!(min_vulnerability > 0.0 && min_vulnerability < th.dual))
    v.push_back("min_vulnerability must lie in (0, VT_DE)");
  if (!(max_vulnerability > th.triple && max_vulnerability < 1.0))
    v.push_back("max_vulnerability must lie in (VT_TE, 1)");
  if (!v.empty()) throw ValidationError(v);
}

GenSpec default_genspec() {
  GenSpec g;
  g.perf_ratios = {{9.08, 9.23}, {26.78, 1.43}, {74.53, 2.84}, {135.86, 1.32}, {7.60, 1.92}};
  g.pools.exec_time_edge = {0.12, 0.35, 0.28, 0.9, 1.1, 2.4, 0.6, 0.45, 0.15, 1.8, 2.1, 9.5, 0.7, 0.3};
  g.pools.power_edge = {3.1, 3.6, 3.4, 3.9, 4.0, 4.2, 3.8, 3.7, 3.3, 4.1, 4.2, 4.4, 3.8, 3.5};
  for (double m : {48, 64, 60, 72, 80, 96, 40, 36, 24, 120, 140, 380, 60, 56, 90})
    g.pools.memory.push_back(m * kMiB);
  for (double m : {20, 12, 10, 10, 14, 16, 8, 8, 6, 30, 32, 180, 12, 10, 40})
    g.pools.storage.push_back(m * kMiB);
  for (double d : {8.0, 2.7, 2.7, 2.7, 0.9, 1.6, 0.3, 0.2, 0.05, 4.0, 6.0, 0.4, 0.3, 2.5, 0.1})
    g.pools.output_size.push_back(d * kMbit);
  g.mode_share = {{"e", {5, 20, 75}}, {"h", {20, 35, 45}}, {"c", {35, 50, 15}}};
  return g;
}

Skeleton generate_structure(const GenSpec& spec) {
  spec.validate();
  Rng rng(stream(spec.seed, 0));
  switch (spec.structure) {
    case Structure::Serial: return serial(spec);
    case Structure::Parallel: return parallel(spec, rng);
    case Structure::Mixed: return mixed(spec, rng);
  }
  return {};
}

double clamp_power(double watts, double idle, double max, double omega) {
  if (watts <= idle) return idle * (1.0 + omega);
  if (watts > max) return max * (1.0 - omega);
  return watts;
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& percent) {
  const double sum = std::accumulate(percent.begin(), percent.end(), 0.0);
  std::vector<std::size_t> q(percent.size(), 0);
  std::vector<std::pair<double, std::size_t>> rest;
  std::size_t used = 0;
  for (std::size_t z = 0; z < percent.size(); ++z) {
    const double exact = sum > 0.0 ? static_cast<double>(total) * percent[z] / sum : 0.0;
    q[z] = static_cast<std::size_t>(std::floor(exact));
    used += q[z];
    rest.emplace_back(exact - std::floor(exact), z);
  }
  std::stable_sort(rest.begin(), rest.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t z = 0; used < total && z < rest.size(); ++z, ++used) ++q[rest[z].second];
  return q;
}

WorkflowGraph synthesize_parameters(const Skeleton& skeleton, const GenSpec& spec,
                                    const Topology& topo) {
  spec.validate();
  Rng rng(stream(spec.seed, 1));
  const std::size_t n = skeleton.task_count;
  std::vector<const Device*> dev;
  for (const auto& id : spec.tiers) {
    auto k = topo.find(id);
    if (!k) throw ValidationError({fmt::format("tier device {} not in topology", id)});
    dev.push_back(&topo.device(*k));
  }
  const std::size_t width = std::to_string(n).size();

  std::vector<TaskSpec> tasks(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = tasks[i];
    t.id = fmt::format("T{:0{}}", i + 1, width);
    t.allowed_devices = spec.tiers;
    const double le = rng.pick(spec.pools.exec_time_edge);
    const auto [th, tc] = rng.pick(spec.perf_ratios);
    const double pe = rng.pick(spec.pools.power_edge);
    const double lat[3] = {le, le / th, le / th / tc};
    const double pow[3] = {pe, pe * th, pe * th * tc};
    for (std::size_t z = 0; z < 3; ++z) {
      const auto& d = *dev[z];
      t.exec_time[d.id] = lat[z];
      const double omega = rng.uniform(0.001, 0.005);
      t.power[d.id] = clamp_power(pow[z], d.idle_power, d.max_power, omega);
    }
    t.memory = rng.pick(spec.pools.memory);
    t.storage = rng.pick(spec.pools.storage);
    t.output_size = rng.pick(spec.pools.output_size);
  }

  const auto th = thresholds(spec.policy);
  for (const auto* d : dev) {
    const auto& share = spec.mode_share.at(d->id);
    const auto quota = apportion(n, {share.se, share.de, share.te});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const double lo[3] = {spec.min_vulnerability, th.dual, th.triple};
    const double hi[3] = {th.dual, th.triple, spec.max_vulnerability};
    std::size_t pos = 0;
    for (std::size_t m = 0; m < 3; ++m)
      for (std::size_t z = 0; z < quota[m]; ++z, ++pos)
        tasks[order[pos]].vulnerability[d->id] = rng.uniform(lo[m], hi[m]);
  }

  std::vector<std::pair<std::string, std::string>> arcs;
  for (const auto& [a, b] : skeleton.arcs) arcs.emplace_back(tasks[a].id, tasks[b].id);
  return WorkflowGraph(std::move(tasks), std::move(arcs));
}

WorkflowGraph assign_fixed_allocations(const WorkflowGraph& graph, const std::string& edge,
                                       const std::string& hub, double pct_edge, double pct_hub,
                                       std::uint64_t seed) {
  if (pct_edge < 0.0 || pct_hub < 0.0 || pct_edge + pct_hub > 100.0)
    throw ValidationError({"fixed allocation percentages must be >= 0 and sum to <= 100"});
  const std::size_t n = graph.size();
  const auto count = [&](double pct) {
    return static_cast<std::size_t>(std::round(pct * static_cast<double>(n) / 100.0));
  };
  const std::size_t ne = count(pct_edge);
  const std::size_t nh = std::min(count(pct_hub), n - ne);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(stream(seed, 2));
  rng.shuffle(order);

  auto tasks = graph.tasks();
  auto pin = [&](TaskSpec& t, const std::string& d) {
    if (std::find(t.allowed_devices.begin(), t.allowed_devices.end(), d) == t.allowed_devices.end())
      throw ValidationError({fmt::format("task {} cannot run on {}", t.id, d)});
    t.allowed_devices = {d};
    for (auto* m : {&t.exec_time, &t.power, &t.vulnerability}) {
      const double keep = m->at(d);
      m->clear();
      (*m)[d] = keep;
    }
  };
  for (std::size_t z = 0; z < ne; ++z) pin(tasks[order[z]], edge);
  for (std::size_t z = ne; z < ne + nh; ++z) pin(tasks[order[z]], hub);

  std::vector<std::pair<std::string, std::string>> arcs;
  for (const auto& a : graph.arcs()) arcs.emplace_back(graph.task(a.parent).id, graph.task(a.child).id);
  return WorkflowGraph(std::move(tasks), std::move(arcs));
}

WorkflowGraph generate_workflow(const GenSpec& spec, const Topology& topo) {
  const auto skeleton = generate_structure(spec);
  const auto graph = synthesize_parameters(skeleton, spec, topo);
  return assign_fixed_allocations(graph, spec.tiers[0], spec.tiers[1], spec.fixed_pct_edge,
                                  spec.fixed_pct_hub, spec.seed);
}

}  // namespace relalloc
