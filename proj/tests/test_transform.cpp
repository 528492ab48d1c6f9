#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace testing;

namespace {

const CandidateNode* find(const CandidateGraph& reg, TaskIndex i, const std::vector<std::string>& devs) {
  for (const auto& c : reg.candidates[i]) {
    if (c.replicas.size() != devs.size()) continue;
    bool same = true;
    for (std::size_t z = 0; z < devs.size(); ++z)
      same = same && reg.topology.device(c.replicas[z].device).id == devs[z];
    if (same) return &c;
  }
  return nullptr;
}

std::size_t expected_candidates(const WorkflowGraph& wf, const Topology& topo, const CriticalityPolicy& p) {
  std::size_t n = 0;
  for (const auto& t : wf.tasks()) {
    const std::size_t q = t.allowed_devices.size();
    for (const auto& d : t.allowed_devices) {
      (void)topo;
      switch (exec_mode(t.vulnerability.at(d), p)) {
        case ExecMode::Single: n += 1; break;
        case ExecMode::Dual: n += q; break;
        case ExecMode::Triple: n += q * (q + 1) / 2; break;
      }
    }
  }
  return n;
}

}  // namespace

TEST_CASE("bundled UAV workflow expands to 41 nodes and 111 arcs") {
  const auto p = load_problem("uav_workflow.json");
  CHECK(p.workflow.size() == 15);
  CHECK(p.workflow.arcs().size() == 15);
  CHECK(p.eg.nodes.size() == 41);
  CHECK(p.eg.arcs.size() == 111);
  CHECK(p.reg.arcs.size() == p.eg.arcs.size());
  CHECK(p.reg.candidate_count() == expected_candidates(p.workflow, p.topology, p.scenario.policy));
}

TEST_CASE("single task single device") {
  const auto topo = mesh({make_device("e")});
  WorkflowGraph wf({task("A", {{"e", 1.0}}, {{"e", 0.001}})}, {});
  const auto eg = build_eg(wf, topo);
  CHECK(eg.nodes.size() == 1);
  CHECK(eg.arcs.empty());
}

TEST_CASE("two free tasks give nine arcs") {
  const auto topo = mesh({make_device("e"), make_device("h"), make_device("c")});
  const std::map<std::string, double> l{{"e", 1.0}, {"h", 1.0}, {"c", 1.0}};
  const std::map<std::string, double> v{{"e", 0.001}, {"h", 0.001}, {"c", 0.001}};
  WorkflowGraph wf({task("A", l, v), task("B", l, v)}, {{"A", "B"}});
  const auto eg = build_eg(wf, topo);
  CHECK(eg.nodes.size() == 6);
  CHECK(eg.arcs.size() == 9);
  CHECK(eg.task_nodes[0].size() == 3);
}

TEST_CASE("candidate sets per execution mode") {
  const auto topo = mesh({make_device("e"), make_device("h"), make_device("c")});
  const std::map<std::string, double> l{{"e", 1.0}, {"h", 1.0}, {"c", 1.0}};
  const CriticalityPolicy p{3, 3, 0.06, 3.0};
  WorkflowGraph wf({task("A", l, {{"e", 0.1}, {"h", 0.03}, {"c", 0.001}})}, {});
  const auto reg = build_reg(build_eg(wf, topo), p);
  CHECK(reg.set_of(0, 0).members.size() == 6);
  CHECK(reg.set_of(0, 1).members.size() == 3);
  CHECK(reg.set_of(0, 2).members.size() == 1);
  const auto& se = reg.candidates[0][reg.set_of(0, 2).members[0]];
  CHECK(se.replicas.size() == 1);
  CHECK(se.replicas[0].device == 2);
  CHECK(se.mode == ExecMode::Single);
  for (const auto& c : reg.candidates[0]) {
    CHECK(c.replicas[0].device == c.primary);
    if (c.replicas.size() == 3) CHECK(c.replicas[1].device <= c.replicas[2].device);
  }
}

TEST_CASE("all triple workflows grow by 18 and 9") {
  const auto topo = load_system();
  const CriticalityPolicy p{3, 3, 0.06, 3.0};
  const std::map<std::string, double> l{{"e", 1.0}, {"h", 0.2}, {"c", 0.05}};
  const std::map<std::string, double> v{{"e", 0.1}, {"h", 0.07}, {"c", 0.06}};
  WorkflowGraph wf({task("A", l, v), task("B", l, v), task("C", l, v)}, {{"A", "B"}, {"A", "C"}, {"B", "C"}});
  const auto reg = build_reg(build_eg(wf, topo), p);
  CHECK(reg.candidate_count() == 18 * 3);
  CHECK(reg.arcs.size() == 9 * 3);
}

TEST_CASE("candidate latency cases") {
  const auto topo = load_system();
  const CriticalityPolicy p{3, 3, 0.06, 3.0};
  // parent P feeds X with 12.5 Mbit; X emits 20 Mbit
  auto parent = task("P", {{"h", 0.1}}, {{"h", 0.001}}, 12.5e6);
  auto x = task("X", {{"h", 1.0}, {"c", 0.4}}, {{"h", 0.03}, {"c", 0.001}}, 20e6);
  auto y = task("Y", {{"e", 2.0}}, {{"e", 0.001}});
  auto z = task("Z", {{"e", 2.0}}, {{"e", 0.03}});
  WorkflowGraph wf({parent, x, y, z}, {{"P", "X"}});
  const auto reg = build_reg(build_eg(wf, topo), p);
  CHECK(reg.input_size[1] == 12.5e6);
  CHECK(reg.input_size[0] == 0.0);

  const auto* se = find(reg, 2, {"e"});
  REQUIRE(se);
  CHECK(se->total_latency == 2.0);

  const auto* de_same = find(reg, 3, {"e", "e"});
  REQUIRE(de_same);
  CHECK(de_same->total_latency == doctest::Approx(4.000001).epsilon(1e-12));

  const auto* de_cross = find(reg, 1, {"h", "c"});
  REQUIRE(de_cross);
  CHECK(de_cross->total_latency == doctest::Approx(2.40000002).epsilon(1e-12));
  for (const auto& cands : reg.candidates)
    for (const auto& c : cands)
      for (const auto& r : c.replicas) CHECK(c.total_latency >= r.exec_time);
}

TEST_CASE("candidate replica energy cases") {
  const auto topo = load_system();
  const CriticalityPolicy p{3, 3, 0.06, 3.0};
  auto parent = task("P", {{"h", 0.1}}, {{"h", 0.001}}, 1e6);
  auto x = task("X", {{"h", 1.0}, {"c", 0.4}}, {{"h", 0.03}, {"c", 0.001}}, 1e6);
  x.power = {{"h", 10.0}, {"c", 100.0}};
  auto y = task("Y", {{"e", 2.0}}, {{"e", 0.001}});
  auto z = task("Z", {{"e", 2.0}}, {{"e", 0.03}});
  WorkflowGraph wf({parent, x, y, z}, {{"P", "X"}});
  const auto reg = build_reg(build_eg(wf, topo), p);
  const auto& h = topo.device(topo.index_of("h"));
  const auto& e = topo.device(topo.index_of("e"));

  const auto* se = find(reg, 2, {"e"});
  REQUIRE(se);
  CHECK(se->replica_energy == std::vector<double>{4.0});

  const auto* de_same = find(reg, 3, {"e", "e"});
  REQUIRE(de_same);
  CHECK(de_same->replica_energy[0] == doctest::Approx(4.0 + e.compare_time * e.compare_power));
  CHECK(de_same->replica_energy[1] == doctest::Approx(4.0));

  const auto* de = find(reg, 1, {"h", "c"});
  REQUIRE(de);
  const double e_ih = 1.0 * 10.0;
  const double e_ic = 0.4 * 100.0;
  CHECK(de->replica_energy[0] ==
        doctest::Approx(e_ih + 1e6 * (2.5e-6 + 1.25e-6) + h.compare_time * h.compare_power).epsilon(1e-12));
  CHECK(de->replica_energy[1] == doctest::Approx(1e6 * 1.25e-6 + e_ic + 1e6 * 2.5e-6).epsilon(1e-12));
}

TEST_CASE("candidate vulnerability products") {
  const auto topo = load_system();
  const CriticalityPolicy p{1, 3, 0.06, 3.0};
  const std::map<std::string, double> l{{"e", 1.0}, {"h", 0.2}, {"c", 0.05}};
  WorkflowGraph wf({task("S", {{"e", 1.0}}, {{"e", 0.05}}), task("A", l, {{"e", 0.1}, {"h", 0.05}, {"c", 0.02}}),
                    task("B", {{"e", 1.0}}, {{"e", 0.2}})},
                   {});
  const auto reg = build_reg(build_eg(wf, topo), p);
  const auto* se = find(reg, 0, {"e"});
  REQUIRE(se);
  CHECK(se->total_vulnerability == doctest::Approx(0.05));
  const auto* te_same = find(reg, 2, {"e", "e", "e"});
  REQUIRE(te_same);
  CHECK(te_same->total_vulnerability == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(te_same->total_reliability == doctest::Approx(0.992).epsilon(1e-12));
  // V on e = 0.1 < 0.18 at level 1 is DE; build the distinct triple directly
  CandidateNode c;
  c.replicas = {{1, 0, 1.0, 0, 0.1, 0, 0}, {2, 1, 1.0, 0, 0.05, 0, 0}, {3, 2, 1.0, 0, 0.02, 0, 0}};
  CHECK(candidate_vulnerability(c) == doctest::Approx(1e-4).epsilon(1e-12));
  c.replicas = {{1, 0, 1.0, 0, 0.1, 0, 0}, {2, 0, 1.0, 0, 0.1, 0, 0}, {3, 0, 1.0, 0, 0.1, 0, 0}};
  CHECK(candidate_vulnerability(c) == doctest::Approx(0.001).epsilon(1e-12));
  c.replicas.resize(1);
  CHECK(candidate_vulnerability(c) == 0.1);
}

TEST_CASE("extra replicas never lower reliability") {
  const auto p = load_problem("uav_workflow.json");
  for (const auto& cands : p.reg.candidates)
    for (const auto& c : cands) {
      double v = 1.0;
      for (const auto& r : c.replicas) {
        const double next = v * r.vulnerability;
        CHECK(next <= v);
        v = next;
      }
      CHECK(c.total_reliability > 0.0);
      CHECK(c.total_reliability < 1.0);
    }
}

TEST_CASE("multi parent input is the sum of parent outputs") {
  const auto topo = load_system();
  WorkflowGraph wf({task("A", {{"e", 1.0}}, {{"e", 0.001}}, 2e6), task("B", {{"e", 1.0}}, {{"e", 0.001}}, 3e6),
                    task("C", {{"e", 1.0}}, {{"e", 0.001}})},
                   {{"A", "C"}, {"B", "C"}});
  const auto reg = build_reg(build_eg(wf, topo), {3, 3, 0.06, 3.0});
  CHECK(reg.input_size[2] == 5e6);
}

TEST_CASE("transformation is deterministic") {
  const auto a = load_problem("uav_workflow.json");
  const auto b = load_problem("uav_workflow.json");
  CHECK(dump(reg_to_json(a.reg)) == dump(reg_to_json(b.reg)));
  CHECK(dump(eg_to_json(a.eg)) == dump(eg_to_json(b.eg)));
  CHECK(reg_to_dot(a.reg) == reg_to_dot(b.reg));
}
