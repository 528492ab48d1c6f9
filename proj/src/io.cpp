#include "relalloc/io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>

namespace relalloc {

namespace {

using Units = std::initializer_list<std::pair<const char*, double>>;

const Units kBytes = {{"_gib", 1073741824.0}, {"_mib", 1048576.0}, {"_kib", 1024.0}, {"_bytes", 1.0}};
const Units kEnergy = {{"_wh", 3600.0}, {"_kj", 1e3}, {"_j", 1.0}};
const Units kTime = {{"_s", 1.0}, {"_ms", 1e-3}, {"_us", 1e-6}};
const Units kPower = {{"_w", 1.0}};
const Units kRate = {{"_mbit_s", 1e6}, {"_kbit_s", 1e3}, {"_bit_s", 1.0}};
const Units kPerBit = {{"_uj_per_bit", 1e-6}, {"_nj_per_bit", 1e-9}, {"_j_per_bit", 1.0}};
const Units kBits = {{"_mbit", 1e6}, {"_kbit", 1e3}, {"_bits", 1.0}};

// Collects problems instead of stopping at the first one.
struct Reader {
  std::vector<std::string> errors;

  // key, scale, json value; nullptr when missing
  std::tuple<std::string, double, const json*> lookup(const json& obj, const std::string& base,
                                                      Units units, const std::string& where) {
    std::tuple<std::string, double, const json*> hit{"", 0.0, nullptr};
    int found = 0;
    for (const auto& [suffix, scale] : units) {
      const std::string key = base + suffix;
      if (auto it = obj.find(key); it != obj.end()) {
        if (found++ == 0) hit = {key, scale, &*it};
      }
    }
    if (found > 1) errors.push_back(fmt::format("{}: {} given in more than one unit", where, base));
    return hit;
  }

  double number(const json& v, const std::string& where) {
    if (!v.is_number()) {
      errors.push_back(fmt::format("{}: expected a number", where));
      return 0.0;
    }
    return v.get<double>();
  }

  double quantity(const json& obj, const std::string& base, Units units, const std::string& where) {
    auto [key, scale, v] = lookup(obj, base, units, where);
    if (!v) {
      errors.push_back(fmt::format("{}: missing {}", where, base));
      return 0.0;
    }
    return number(*v, where + "." + key) * scale;
  }

  // absent or null means unbounded
  std::optional<double> optional_quantity(const json& obj, const std::string& base, Units units,
                                          const std::string& where) {
    auto [key, scale, v] = lookup(obj, base, units, where);
    if (!v || v->is_null()) return std::nullopt;
    return number(*v, where + "." + key) * scale;
  }

  std::map<std::string, double> quantity_map(const json& obj, const std::string& base, Units units,
                                             const std::string& where) {
    std::map<std::string, double> out;
    auto [key, scale, v] = lookup(obj, base, units, where);
    if (!v || !v->is_object()) {
      errors.push_back(fmt::format("{}: missing {} map", where, base));
      return out;
    }
    for (const auto& [dev, x] : v->items()) out[dev] = number(x, where + "." + key + "." + dev) * scale;
    return out;
  }

  std::string text(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
      errors.push_back(fmt::format("{}: missing string '{}'", where, key));
      return {};
    }
    return it->get<std::string>();
  }

  const json& array(const json& obj, const char* key, const std::string& where) {
    static const json empty = json::array();
    auto it = obj.find(key);
    if (it == obj.end()) return empty;
    if (!it->is_array()) {
      errors.push_back(fmt::format("{}: '{}' must be an array", where, key));
      return empty;
    }
    return *it;
  }

  void finish() const {
    if (!errors.empty()) throw ValidationError(errors);
  }
};

const char* route_name(RouteKind k) {
  switch (k) {
    case RouteKind::SameDevice: return "same";
    case RouteKind::Direct: return "direct";
    case RouteKind::Relayed: return "relayed";
  }
  return "?";
}

json arc_json(const CandidateGraph& reg, const EgArc& a) {
  const auto& wf = reg.workflow;
  const auto& topo = reg.topology;
  json j = {{"parent", wf.task(a.parent).id},
            {"child", wf.task(a.child).id},
            {"from", topo.device(a.from).id},
            {"to", topo.device(a.to).id},
            {"route", route_name(a.route.kind)},
            {"latency_s", a.latency},
            {"energy_j", a.energy}};
  if (a.route.kind == RouteKind::Relayed) j["via"] = topo.device(a.route.via).id;
  return j;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({fmt::format("cannot read {}", path.string())});
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError({fmt::format("{}: {}", path.string(), e.what())});
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Topology parse_system(const json& j) {
  Reader r;
  std::vector<Device> devices;
  for (const auto& d : r.array(j, "devices", "system")) {
    Device dev;
    dev.id = r.text(d, "id", "device");
    const std::string at = "device " + dev.id;
    dev.memory_budget = r.quantity(d, "memory", kBytes, at);
    dev.storage_budget = r.quantity(d, "storage", kBytes, at);
    dev.energy_budget = r.optional_quantity(d, "energy", kEnergy, at);
    dev.compare_time = r.quantity(d, "compare_time", kTime, at);
    dev.vote_time = r.quantity(d, "vote_time", kTime, at);
    dev.compare_power = r.quantity(d, "compare_power", kPower, at);
    dev.vote_power = r.quantity(d, "vote_power", kPower, at);
    dev.idle_power = r.quantity(d, "idle_power", kPower, at);
    dev.max_power = r.quantity(d, "max_power", kPower, at);
    devices.push_back(std::move(dev));
  }
  std::vector<Channel> channels;
  for (const auto& c : r.array(j, "channels", "system")) {
    Channel ch;
    ch.from = r.text(c, "from", "channel");
    ch.to = r.text(c, "to", "channel");
    const std::string at = fmt::format("channel {}->{}", ch.from, ch.to);
    ch.bandwidth = r.quantity(c, "bandwidth", kRate, at);
    ch.tx_energy = r.quantity(c, "tx_energy", kPerBit, at);
    ch.rx_energy = r.quantity(c, "rx_energy", kPerBit, at);
    channels.push_back(std::move(ch));
  }
  std::vector<Relay> relays;
  for (const auto& x : r.array(j, "relays", "system"))
    relays.push_back({r.text(x, "from", "relay"), r.text(x, "to", "relay"), r.text(x, "via", "relay")});
  r.finish();
  return Topology(std::move(devices), std::move(channels), std::move(relays));
}

WorkflowData parse_workflow(const json& j) {
  Reader r;
  WorkflowData w;
  if (auto it = j.find("tasks"); it == j.end() || !it->is_array() || it->empty())
    r.errors.push_back("workflow: 'tasks' must be a non-empty array");
  for (const auto& t : r.array(j, "tasks", "workflow")) {
    TaskSpec spec;
    spec.id = r.text(t, "id", "task");
    const std::string at = "task " + spec.id;
    spec.memory = r.quantity(t, "memory", kBytes, at);
    spec.storage = r.quantity(t, "storage", kBytes, at);
    spec.output_size = r.quantity(t, "output", kBits, at);
    spec.exec_time = r.quantity_map(t, "exec_time", kTime, at);
    spec.power = r.quantity_map(t, "power", kPower, at);
    if (auto v = t.find("vulnerability"); v != t.end() && v->is_object()) {
      for (const auto& [dev, x] : v->items()) spec.vulnerability[dev] = r.number(x, at + ".vulnerability");
    } else {
      r.errors.push_back(at + ": missing vulnerability map");
    }
    for (const auto& d : r.array(t, "allowed_devices", at)) {
      if (d.is_string())
        spec.allowed_devices.push_back(d.get<std::string>());
      else
        r.errors.push_back(at + ": allowed_devices entries must be strings");
    }
    w.tasks.push_back(std::move(spec));
  }
  for (const auto& a : r.array(j, "arcs", "workflow")) {
    if (a.is_array() && a.size() == 2 && a[0].is_string() && a[1].is_string())
      w.arcs.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
    else
      r.errors.push_back("workflow: arcs must be [parent, child] string pairs");
  }
  r.finish();
  return w;
}

Scenario parse_scenario(const json& j) {
  Scenario s;
  try {
    if (auto c = j.find("criticality"); c != j.end()) {
      s.policy.level = c->value("level", s.policy.level);
      s.policy.max_level = c->value("max_level", s.policy.max_level);
      s.policy.kappa = c->value("kappa", s.policy.kappa);
      s.policy.lambda = c->value("lambda", s.policy.lambda);
    }
    if (auto w = j.find("weights"); w != j.end()) {
      s.weights.rel = w->value("w_rel", s.weights.rel);
      s.weights.lat = w->value("w_lat", 1.0 - s.weights.rel);
    }
    if (auto o = j.find("solver"); o != j.end()) {
      const std::string mode = o->value("mode", "builtin");
      if (mode == "builtin")
        s.solver.mode = SolverMode::Builtin;
      else if (mode == "export-only")
        s.solver.mode = SolverMode::ExportOnly;
      else if (mode == "external")
        s.solver.mode = SolverMode::External;
      else
        throw ValidationError({fmt::format("scenario: unknown solver mode '{}'", mode)});
      if (auto t = o->find("time_limit_s"); t != o->end() && !t->is_null()) s.solver.time_limit = t->get<double>();
      s.solver.absolute_gap = o->value("absolute_gap", 0.0);
    }
    s.sweep_step = j.value("sweep_step", s.sweep_step);
  } catch (const json::exception& e) {
    throw ValidationError({fmt::format("scenario: {}", e.what())});
  }
  std::vector<std::string> v;
  for (auto check : {+[](const Scenario& x) { x.policy.validate(); },
                     +[](const Scenario& x) { x.weights.validate(); }}) {
    try {
      check(s);
    } catch (const ValidationError& e) {
      v.insert(v.end(), e.violations().begin(), e.violations().end());
    }
  }
  if (s.solver.absolute_gap < 0.0) v.push_back("scenario: absolute_gap must be >= 0");
  if (!(s.sweep_step > 0.0 && s.sweep_step <= 1.0)) v.push_back("scenario: sweep_step must lie in (0,1]");
  if (!v.empty()) throw ValidationError(v);
  return s;
}

GenSpec parse_genspec(const json& j) {
  GenSpec g = default_genspec();
  try {
    if (auto s = j.find("structure"); s != j.end()) g.structure = parse_structure(s->get<std::string>());
    g.task_count = j.value("task_count", g.task_count);
    g.in_degree = j.value("in_degree", g.in_degree);
    g.out_degree = j.value("out_degree", g.out_degree);
    g.seed = j.value("seed", g.seed);
    if (auto f = j.find("fixed_alloc_pct"); f != j.end()) {
      g.fixed_pct_edge = f->value("edge", 0.0);
      g.fixed_pct_hub = f->value("hub", 0.0);
    }
    if (auto p = j.find("perf_ratios"); p != j.end()) {
      g.perf_ratios.clear();
      for (const auto& x : *p) g.perf_ratios.emplace_back(x.at(0).get<double>(), x.at(1).get<double>());
    }
    if (auto t = j.find("tiers"); t != j.end()) g.tiers = t->get<std::vector<std::string>>();
    if (auto m = j.find("mode_share"); m != j.end()) {
      g.mode_share.clear();
      for (const auto& [dev, x] : m->items())
        g.mode_share[dev] = {x.at("se").get<double>(), x.at("de").get<double>(), x.at("te").get<double>()};
    }
    if (auto pools = j.find("value_pools"); pools != j.end()) {
      auto pool = [&](const char* key, std::vector<double>& out, double scale) {
        if (auto it = pools->find(key); it != pools->end()) {
          out.clear();
          for (const auto& x : *it) out.push_back(x.get<double>() * scale);
        }
      };
      pool("exec_time_edge_s", g.pools.exec_time_edge, 1.0);
      pool("power_edge_w", g.pools.power_edge, 1.0);
      pool("memory_mib", g.pools.memory, 1048576.0);
      pool("storage_mib", g.pools.storage, 1048576.0);
      pool("output_mbit", g.pools.output_size, 1e6);
    }
    if (auto c = j.find("criticality"); c != j.end()) {
      g.policy.level = c->value("level", g.policy.level);
      g.policy.max_level = c->value("max_level", g.policy.max_level);
      g.policy.kappa = c->value("kappa", g.policy.kappa);
      g.policy.lambda = c->value("lambda", g.policy.lambda);
    }
    g.min_vulnerability = j.value("min_vulnerability", g.min_vulnerability);
    g.max_vulnerability = j.value("max_vulnerability", g.max_vulnerability);
  } catch (const json::exception& e) {
    throw ValidationError({fmt::format("genspec: {}", e.what())});
  }
  g.validate();
  return g;
}

json to_json(const Topology& topo) {
  json devices = json::array();
  for (const auto& d : topo.devices()) {
    devices.push_back({{"id", d.id},
                       {"memory_gib", d.memory_budget / 1073741824.0},
                       {"storage_gib", d.storage_budget / 1073741824.0},
                       {"energy_wh", d.energy_budget ? json(*d.energy_budget / 3600.0) : json(nullptr)},
                       {"compare_time_us", d.compare_time * 1e6},
                       {"vote_time_us", d.vote_time * 1e6},
                       {"compare_power_w", d.compare_power},
                       {"vote_power_w", d.vote_power},
                       {"idle_power_w", d.idle_power},
                       {"max_power_w", d.max_power}});
  }
  json channels = json::array();
  for (const auto& c : topo.channels())
    channels.push_back({{"from", c.from},
                        {"to", c.to},
                        {"bandwidth_mbit_s", c.bandwidth / 1e6},
                        {"tx_energy_uj_per_bit", c.tx_energy * 1e6},
                        {"rx_energy_uj_per_bit", c.rx_energy * 1e6}});
  json relays = json::array();
  for (const auto& r : topo.relays()) relays.push_back({{"from", r.from}, {"to", r.to}, {"via", r.via}});
  return {{"devices", devices}, {"channels", channels}, {"relays", relays}};
}

json to_json(const WorkflowGraph& wf) {
  json tasks = json::array();
  for (const auto& t : wf.tasks()) {
    tasks.push_back({{"id", t.id},
                     {"memory_mib", t.memory / 1048576.0},
                     {"storage_mib", t.storage / 1048576.0},
                     {"output_mbit", t.output_size / 1e6},
                     {"allowed_devices", t.allowed_devices},
                     {"exec_time_s", t.exec_time},
                     {"power_w", t.power},
                     {"vulnerability", t.vulnerability}});
  }
  json arcs = json::array();
  for (const auto& a : wf.arcs()) arcs.push_back({wf.task(a.parent).id, wf.task(a.child).id});
  return {{"tasks", tasks}, {"arcs", arcs}};
}

json to_json(const Scenario& s) {
  const char* mode = s.solver.mode == SolverMode::Builtin      ? "builtin"
                     : s.solver.mode == SolverMode::ExportOnly ? "export-only"
                                                               : "external";
  return {{"criticality",
           {{"level", s.policy.level},
            {"max_level", s.policy.max_level},
            {"kappa", s.policy.kappa},
            {"lambda", s.policy.lambda}}},
          {"weights", {{"w_rel", s.weights.rel}, {"w_lat", s.weights.lat}}},
          {"solver",
           {{"mode", mode},
            {"time_limit_s", s.solver.time_limit ? json(*s.solver.time_limit) : json(nullptr)},
            {"absolute_gap", s.solver.absolute_gap}}},
          {"sweep_step", s.sweep_step}};
}

json eg_to_json(const ExpandedGraph& eg) {
  json nodes = json::array();
  for (const auto& n : eg.nodes)
    nodes.push_back({{"task", eg.workflow.task(n.task).id}, {"device", eg.topology.device(n.device).id}});
  json arcs = json::array();
  for (const auto& a : eg.arcs) {
    json j = {{"parent", eg.workflow.task(a.parent).id},
              {"child", eg.workflow.task(a.child).id},
              {"from", eg.topology.device(a.from).id},
              {"to", eg.topology.device(a.to).id},
              {"route", route_name(a.route.kind)},
              {"latency_s", a.latency},
              {"energy_j", a.energy}};
    if (a.route.kind == RouteKind::Relayed) j["via"] = eg.topology.device(a.route.via).id;
    arcs.push_back(std::move(j));
  }
  return {{"node_count", eg.nodes.size()}, {"arc_count", eg.arcs.size()}, {"nodes", nodes}, {"arcs", arcs}};
}

json reg_to_json(const CandidateGraph& reg) {
  const auto& topo = reg.topology;
  json tasks = json::array();
  for (TaskIndex i = 0; i < reg.workflow.size(); ++i) {
    json sets = json::array();
    for (const auto& set : reg.sets[i]) {
      json cands = json::array();
      for (auto m : set.members) {
        const auto& c = reg.candidates[i][m];
        json reps = json::array();
        for (std::size_t z = 0; z < c.replicas.size(); ++z) {
          const auto& r = c.replicas[z];
          reps.push_back({{"slot", r.slot},
                          {"device", topo.device(r.device).id},
                          {"exec_time_s", r.exec_time},
                          {"energy_j", c.replica_energy[z]},
                          {"vulnerability", r.vulnerability}});
        }
        cands.push_back({{"id", c.id},
                         {"mode", to_string(c.mode)},
                         {"latency_s", c.total_latency},
                         {"vulnerability", c.total_vulnerability},
                         {"reliability", c.total_reliability},
                         {"replicas", reps}});
      }
      sets.push_back({{"primary", topo.device(set.primary).id}, {"candidates", cands}});
    }
    tasks.push_back({{"id", reg.workflow.task(i).id}, {"input_mbit", reg.input_size[i] / 1e6}, {"sets", sets}});
  }
  json arcs = json::array();
  for (const auto& a : reg.arcs) arcs.push_back(arc_json(reg, a));
  return {{"candidate_count", reg.candidate_count()},
          {"arc_count", reg.arcs.size()},
          {"tasks", tasks},
          {"arcs", arcs}};
}

std::string reg_to_dot(const CandidateGraph& reg) {
  const auto& wf = reg.workflow;
  const auto& topo = reg.topology;
  std::ostringstream out;
  out << "digraph reg {\n  rankdir=LR;\n  node [shape=box];\n";
  for (TaskIndex i = 0; i < wf.size(); ++i) {
    out << fmt::format("  subgraph \"cluster_{}\" {{\n    label=\"{}\";\n", wf.task(i).id, wf.task(i).id);
    for (const auto& set : reg.sets[i]) {
      std::string label = fmt::format("{}@{}", wf.task(i).id, topo.device(set.primary).id);
      for (auto m : set.members) label += "\\n" + reg.candidates[i][m].id;
      out << fmt::format("    \"{}@{}\" [label=\"{}\"];\n", wf.task(i).id, topo.device(set.primary).id, label);
    }
    out << "  }\n";
  }
  for (const auto& a : reg.arcs)
    out << fmt::format("  \"{}@{}\" -> \"{}@{}\" [label=\"{:.6g}s\"];\n", wf.task(a.parent).id,
                       topo.device(a.from).id, wf.task(a.child).id, topo.device(a.to).id, a.latency);
  out << "}\n";
  return out.str();
}

}  // namespace relalloc
