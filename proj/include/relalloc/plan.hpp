#pragma once

// End-to-end pipeline: inputs -> expanded and candidate graphs -> model ->
// normalization -> weighted solve -> allocation plan. Also weight sweeps,
// single-device baselines and plan validation.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relalloc/io.hpp"
#include "relalloc/oracle.hpp"

namespace relalloc {

struct Problem {
  Topology topology;
  WorkflowGraph workflow;
  Scenario scenario;
  ExpandedGraph eg;
  CandidateGraph reg;
  BilpModel model;  // constraints only, objective empty
};

/// Validates the workflow against the topology (throws ValidationError with
/// every violation) and builds graphs and constraint rows.
Problem build_problem(const Topology& topo, const WorkflowData& data, const Scenario& scenario);

struct TaskAllocation {
  std::string task;
  std::string candidate;
  std::string mode;
  std::string primary;
  std::vector<std::string> replicas;  // devices of slots 2 and 3
  double reliability = 0.0;
  double latency = 0.0;  // seconds
};

struct DeviceUsage {
  std::string device;
  double memory = 0.0;
  double memory_budget = 0.0;
  double storage = 0.0;
  double storage_budget = 0.0;
  double energy = 0.0;
  std::optional<double> energy_budget;
  std::size_t placements = 0;  // primaries and replicas
  double placement_pct = 0.0;
};

struct AllocationPlan {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<std::size_t> choice;
  std::vector<TaskAllocation> tasks;
  std::vector<std::string> arcs;  // "<parent>@<device>-><child>@<device>"
  double f_rel = 0.0;
  double reliability = 0.0;
  double f_lat = 0.0;
  double f_rel_norm = 0.0;
  double f_lat_norm = 0.0;
  double g = 0.0;
  double bound = 0.0;
  NormalizationBounds bounds;
  ObjectiveWeights weights;
  std::vector<DeviceUsage> devices;
  // primary device -> device of each extra replica -> count
  std::map<std::string, std::map<std::string, std::size_t>> replica_placement;
  std::size_t nodes = 0;
  double wall_time_s = 0.0;  // reported on the console only
};

/// Builds the report for a solved choice from first principles.
AllocationPlan build_plan(const CandidateGraph& reg, const Solution& sol,
                          const NormalizationBounds& bounds, const ObjectiveWeights& w);

json plan_to_json(const AllocationPlan& plan);
std::string plan_table(const AllocationPlan& plan);

/// Reads the candidate choice of a plan document back against a candidate graph.
std::vector<std::size_t> plan_choice(const json& plan, const CandidateGraph& reg);

/// Selected replica vulnerabilities per task, input to Monte Carlo sampling.
std::vector<std::vector<double>> replica_vulnerabilities(const CandidateGraph& reg,
                                                         const std::vector<std::size_t>& choice);

struct SolveOutcome {
  NormalizationBounds bounds;
  BilpModel model;
  Solution solution;
  AllocationPlan plan;
};

/// Normalization (unless bounds are given), weighting and the built-in solve.
/// Throws InfeasibleError when the constraint set is empty.
SolveOutcome solve_problem(const Problem& p, const ObjectiveWeights& w,
                           const std::optional<NormalizationBounds>& bounds = std::nullopt);

struct SweepResult {
  NormalizationBounds bounds;
  std::vector<std::string> devices;
  std::vector<AllocationPlan> rows;  // ascending w_rel
};

/// Weight grid 0, step, ..., 1 for w_rel; bounds computed once. Rows are
/// solved on up to `workers` threads and reported in grid order.
SweepResult run_sweep(const Problem& p, double step, unsigned workers = 1);

std::vector<double> weight_grid(double step);

std::string sweep_csv(const SweepResult& s);
json sweep_to_json(const SweepResult& s);

struct BaselineResult {
  std::string device;
  bool feasible = false;
  std::string reason;
  AllocationPlan plan;  // g normalized with the unrestricted bounds
};

struct BaselineReport {
  AllocationPlan optimum;
  std::vector<BaselineResult> baselines;
};

/// Restricts every task that may run on more than one device to device d, for
/// each device in turn, and solves at the scenario weights.
BaselineReport run_baselines(const Topology& topo, const WorkflowData& data, const Scenario& scenario);

json baseline_to_json(const BaselineReport& r);

struct PlanCheck {
  std::vector<std::string> problems;
  ChoiceEvaluation evaluation;
  double g = 0.0;
  MonteCarloEstimate monte_carlo;
  std::optional<OracleResult> oracle;  // when small enough to enumerate
  bool ok() const { return problems.empty(); }
};

/// Re-verifies a plan document: row feasibility, objectives recomputed from
/// first principles, Monte Carlo reliability and, when the instance is small
/// enough, exhaustive optimality.
PlanCheck validate_plan(const Problem& p, const json& plan, std::size_t samples, std::uint64_t seed);

json check_to_json(const PlanCheck& c);

}  // namespace relalloc
