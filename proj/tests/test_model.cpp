#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace testing;

namespace {

bool mentions(const ValidationReport& r, const std::string& word) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(word) != std::string::npos; });
}

Topology three() { return mesh({make_device("e"), make_device("h"), make_device("c")}); }

TaskSpec free_task(const std::string& id) {
  return task(id, {{"e", 1.0}, {"h", 0.5}, {"c", 0.1}}, {{"e", 0.01}, {"h", 0.01}, {"c", 0.01}});
}

}  // namespace

TEST_CASE("thresholds match the published table") {
  const auto t1 = thresholds({1, 3, 0.06, 3.0});
  const auto t2 = thresholds({2, 3, 0.06, 3.0});
  const auto t3 = thresholds({3, 3, 0.06, 3.0});
  CHECK(t1.dual == 0.06);
  CHECK(t1.triple == 0.18);
  CHECK(t2.dual == 0.03);
  CHECK(t2.triple == 0.09);
  CHECK(t3.dual == 0.02);
  CHECK(t3.triple == 0.06);
}

TEST_CASE("thresholds decrease strictly with criticality") {
  for (int level = 1; level < 6; ++level) {
    const auto a = thresholds({level, 6, 0.06, 3.0});
    const auto b = thresholds({level + 1, 6, 0.06, 3.0});
    CHECK(b.dual < a.dual);
    CHECK(b.triple < a.triple);
    CHECK(a.dual < a.triple);
  }
}

TEST_CASE("criticality policy rejects bad parameters") {
  CHECK_THROWS_AS(CriticalityPolicy({0, 3, 0.06, 3.0}).validate(), ValidationError);
  CHECK_THROWS_AS(CriticalityPolicy({4, 3, 0.06, 3.0}).validate(), ValidationError);
  CHECK_THROWS_AS(CriticalityPolicy({1, 3, 0.0, 3.0}).validate(), ValidationError);
  CHECK_THROWS_AS(CriticalityPolicy({1, 3, 0.06, 1.0}).validate(), ValidationError);
  CHECK_NOTHROW(CriticalityPolicy({2, 3, 0.06, 3.0}).validate());
}

TEST_CASE("validate_workflow accepts a well formed chain") {
  const auto r = validate_workflow({free_task("A"), free_task("B")}, {{"A", "B"}}, three());
  CHECK(r.ok());
}

TEST_CASE("validate_workflow reports a two-cycle") {
  const auto r = validate_workflow({free_task("A"), free_task("B")}, {{"A", "B"}, {"B", "A"}}, three());
  CHECK_FALSE(r.ok());
  CHECK(mentions(r, "cycle"));
}

TEST_CASE("validate_workflow rejects vulnerability of one") {
  auto t = free_task("A");
  t.vulnerability["h"] = 1.0;
  const auto r = validate_workflow({t}, {}, three());
  CHECK(mentions(r, "vulnerability out of open interval"));
}

TEST_CASE("validate_workflow lists every problem") {
  auto a = free_task("A");
  a.allowed_devices.push_back("x");
  a.exec_time.erase("c");
  auto b = free_task("B");
  b.vulnerability["e"] = 0.0;
  const auto r = validate_workflow({a, b}, {{"A", "B"}, {"A", "B"}, {"B", "Z"}}, three());
  CHECK(mentions(r, "unknown device x"));
  CHECK(mentions(r, "missing exec_time for device c"));
  CHECK(mentions(r, "vulnerability out of open interval"));
  CHECK(mentions(r, "duplicate arc"));
  CHECK(mentions(r, "unknown task"));
}

TEST_CASE("workflow graph derives child counts and rejects cycles") {
  WorkflowGraph g({free_task("A"), free_task("B"), free_task("C")}, {{"A", "B"}, {"A", "C"}});
  CHECK(g.child_count(0) == 2);
  CHECK(g.child_count(1) == 0);
  CHECK(g.parents(2) == std::vector<TaskIndex>{0});
  CHECK_THROWS_AS(WorkflowGraph({free_task("A"), free_task("B")}, {{"A", "B"}, {"B", "A"}}),
                  ValidationError);
  CHECK_THROWS_AS(WorkflowGraph({free_task("A")}, {{"A", "A"}}), ValidationError);
}

TEST_CASE("topology requires a route for every ordered pair") {
  const std::vector<Device> d{make_device("e"), make_device("h"), make_device("c")};
  const std::vector<Channel> ch{{"e", "h", 1e6, 0, 0}, {"h", "e", 1e6, 0, 0},
                                {"h", "c", 1e6, 0, 0}, {"c", "h", 1e6, 0, 0}};
  CHECK_THROWS_AS(Topology(d, ch), ValidationError);
  const Topology ok(d, ch, {{"e", "c", "h"}, {"c", "e", "h"}});
  CHECK(ok.relay(0, 2) == DeviceIndex{1});
  CHECK(ok.channel(0, 2) == nullptr);
  // relay legs must exist as direct channels
  CHECK_THROWS_AS(Topology(d, ch, {{"e", "c", "c"}, {"c", "e", "h"}}), ValidationError);
}

TEST_CASE("device checks power range and budgets") {
  auto d = make_device("e");
  d.idle_power = d.max_power;
  CHECK_THROWS_AS(mesh({d}), ValidationError);
  d = make_device("e");
  d.memory_budget = -1;
  CHECK_THROWS_AS(mesh({d}), ValidationError);
}

TEST_CASE("bundled system converts units on parse") {
  const auto topo = load_system();
  const auto& e = topo.device(topo.index_of("e"));
  CHECK(e.memory_budget == 1073741824.0);
  CHECK(e.energy_budget.value() == doctest::Approx(129.96 * 3600.0));
  CHECK(e.compare_time == doctest::Approx(1e-6));
  CHECK_FALSE(topo.device(topo.index_of("c")).energy_budget.has_value());
  const auto* eh = topo.channel(topo.index_of("e"), topo.index_of("h"));
  REQUIRE(eh != nullptr);
  CHECK(eh->bandwidth == doctest::Approx(11e6));
  CHECK(eh->tx_energy == doctest::Approx(1e-6));
}
