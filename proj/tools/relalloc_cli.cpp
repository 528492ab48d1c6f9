// relalloc: reliability/latency-aware task allocation for edge-hub-cloud systems.
//
//   relalloc generate   --genspec spec.json --system system.json --out workflow.json
//   relalloc transform  --system s.json --workflow w.json --scenario sc.json --out dir/
//   relalloc solve      --system s.json --workflow w.json --scenario sc.json [--w-rel 0.7] --out plan.json
//   relalloc sweep      ... [--step 0.05] [--workers 4] --out dir/
//   relalloc baseline   ... --out report.json
//   relalloc validate   ... --plan plan.json [--samples N] [--seed S]
//   relalloc export-mps ... [--objective g|rel-max|rel-min|lat-max|lat-min] --out dir/
//
// Exit codes: 0 success, 1 invalid input or failed validation, 2 infeasible,
// 3 time limit.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "relalloc/plan.hpp"

namespace fs = std::filesystem;
using namespace relalloc;

namespace {

struct Inputs {
  std::string system;
  std::string workflow;
  std::string scenario;
  std::optional<double> w_rel;
  std::optional<double> time_limit;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool need_scenario = true) {
  cmd->add_option("--system", in.system, "devices, channels and relays")->required()->check(CLI::ExistingFile);
  cmd->add_option("--workflow", in.workflow, "tasks and arcs")->required()->check(CLI::ExistingFile);
  auto* sc = cmd->add_option("--scenario", in.scenario, "criticality, weights, solver options")
                 ->check(CLI::ExistingFile);
  if (need_scenario) sc->required();
  cmd->add_option("--w-rel", in.w_rel, "reliability weight; w_lat = 1 - w_rel")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--time-limit", in.time_limit, "solver time limit in seconds")->check(CLI::PositiveNumber);
}

Scenario load_scenario(const Inputs& in) {
  Scenario s = in.scenario.empty() ? Scenario{} : parse_scenario(read_json(in.scenario));
  if (in.w_rel) s.weights = {*in.w_rel, 1.0 - *in.w_rel};
  if (in.time_limit) s.solver.time_limit = *in.time_limit;
  return s;
}

Problem load_problem(const Inputs& in) {
  const auto topo = parse_system(read_json(in.system));
  const auto data = parse_workflow(read_json(in.workflow));
  return build_problem(topo, data, load_scenario(in));
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
}

int cmd_generate(const std::string& genspec, const std::string& system, std::optional<std::uint64_t> seed,
                 const std::string& out) {
  auto spec = parse_genspec(read_json(genspec));
  if (seed) spec.seed = *seed;
  const auto topo = parse_system(read_json(system));
  const auto wf = generate_workflow(spec, topo);
  write_or_print(out, dump(to_json(wf)));
  if (!out.empty())
    std::cout << fmt::format("{} workflow: {} tasks, {} arcs, seed {} -> {}\n", to_string(spec.structure),
                             wf.size(), wf.arcs().size(), spec.seed, out);
  return 0;
}

int cmd_transform(const Inputs& in, const std::string& out) {
  const auto p = load_problem(in);
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  write_text(dir / "eg.json", dump(eg_to_json(p.eg)));
  write_text(dir / "reg.json", dump(reg_to_json(p.reg)));
  write_text(dir / "reg.dot", reg_to_dot(p.reg));
  const auto& cat = p.model.catalog;
  std::cout << fmt::format("EG  {} nodes / {} arcs\n", p.eg.nodes.size(), p.eg.arcs.size());
  std::cout << fmt::format("REG {} candidates / {} arcs / {} replicas\n", p.reg.candidate_count(),
                           p.reg.arcs.size(), p.reg.replica_count());
  std::cout << fmt::format("BILP {} variables ({} candidate, {} replica, {} set, {} arc), {} rows\n", cat.size(),
                           cat.count(VarKind::Candidate), cat.count(VarKind::Replica), cat.count(VarKind::Set),
                           cat.count(VarKind::Arc), p.model.constraints.size());
  return 0;
}

int cmd_solve(const Inputs& in, const std::string& out) {
  const auto p = load_problem(in);
  const auto r = solve_problem(p, p.scenario.weights);
  write_or_print(out, dump(plan_to_json(r.plan)));
  if (!out.empty()) {
    std::cout << plan_table(r.plan);
    std::cout << fmt::format("search nodes {}  wall time {:.3f} s\n", r.plan.nodes, r.plan.wall_time_s);
  }
  return exit_code(r.plan.status);
}

int cmd_sweep(const Inputs& in, std::optional<double> step, unsigned workers, const std::string& out) {
  const auto p = load_problem(in);
  const auto s = run_sweep(p, step.value_or(p.scenario.sweep_step), workers);
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  write_text(dir / "sweep.csv", sweep_csv(s));
  write_text(dir / "sweep.json", dump(sweep_to_json(s)));
  int code = 0;
  std::cout << fmt::format("{:>6} {:>6} {:>12} {:>12} {:>10} {:>10}\n", "w_rel", "w_lat", "reliability",
                           "latency_s", "rel_norm", "lat_norm");
  for (const auto& row : s.rows) {
    std::cout << fmt::format("{:>6.2f} {:>6.2f} {:>12.6f} {:>12.6f} {:>10.4f} {:>10.4f}\n", row.weights.rel,
                             row.weights.lat, row.reliability, row.f_lat, row.f_rel_norm, row.f_lat_norm);
    code = std::max(code, exit_code(row.status));
  }
  std::cout << fmt::format("{} rows -> {}\n", s.rows.size(), (dir / "sweep.csv").string());
  return code;
}

int cmd_baseline(const Inputs& in, const std::string& out) {
  const auto topo = parse_system(read_json(in.system));
  const auto data = parse_workflow(read_json(in.workflow));
  const auto report = run_baselines(topo, data, load_scenario(in));
  write_or_print(out, dump(baseline_to_json(report)));
  if (!out.empty()) {
    std::cout << fmt::format("{:<10} {:>12} {:>12} {:>10}\n", "strategy", "reliability", "latency_s", "g");
    std::cout << fmt::format("{:<10} {:>12.6f} {:>12.6f} {:>10.4f}\n", "optimum", report.optimum.reliability,
                             report.optimum.f_lat, report.optimum.g);
    for (const auto& b : report.baselines) {
      if (b.feasible)
        std::cout << fmt::format("{:<10} {:>12.6f} {:>12.6f} {:>10.4f}\n", "all-" + b.device, b.plan.reliability,
                                 b.plan.f_lat, b.plan.g);
      else
        std::cout << fmt::format("{:<10} infeasible: {}\n", "all-" + b.device, b.reason);
    }
  }
  return exit_code(report.optimum.status);
}

int cmd_validate(const Inputs& in, const std::string& plan, std::size_t samples, std::uint64_t seed,
                 const std::string& out) {
  const auto p = load_problem(in);
  const auto check = validate_plan(p, read_json(plan), samples, seed);
  write_or_print(out, dump(check_to_json(check)));
  if (!out.empty()) {
    std::cout << fmt::format("reliability {:.6f}, Monte Carlo {:.6f} +- {:.6f} ({} samples, seed {})\n",
                             check.evaluation.reliability, check.monte_carlo.estimate, check.monte_carlo.std_error,
                             check.monte_carlo.samples, check.monte_carlo.seed);
    if (check.oracle)
      std::cout << fmt::format("enumerated {} choices, {} feasible, best g {:.9f}, plan g {:.9f}\n",
                               check.oracle->enumerated_count, check.oracle->feasible_count, check.oracle->best_g,
                               check.g);
    for (const auto& prob : check.problems) std::cout << "problem: " << prob << '\n';
    std::cout << (check.ok() ? "plan OK\n" : "plan INVALID\n");
  }
  return check.ok() ? 0 : 1;
}

int cmd_export(const Inputs& in, const std::string& objective, const std::vector<double>& bounds,
               const std::string& out) {
  const auto p = load_problem(in);
  BilpModel model = p.model;
  if (objective == "g") {
    NormalizationBounds b;
    if (bounds.empty())
      b = normalization_bounds(p.model, p.scenario.solver);
    else
      b = {bounds[0], bounds[1], bounds[2], bounds[3]};
    model = weighted_objective(p.model, b, p.scenario.weights);
  } else {
    const bool rel = objective.rfind("rel", 0) == 0;
    const double sign = objective.ends_with("max") ? 1.0 : -1.0;
    model.objective = rel ? p.model.reliability_terms : p.model.latency_terms;
    for (auto& t : model.objective) t.second *= sign;
    model.metadata.name = "relalloc-" + objective;
  }
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  export_mps(model, dir / "model.mps", dir / "columns.json");
  std::cout << fmt::format("{} columns, {} rows -> {}\n", model.catalog.size(), model.constraints.size(),
                           (dir / "model.mps").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability and latency aware task allocation for edge-hub-cloud workflows"};
  app.require_subcommand(1);

  std::string out;
  Inputs in;

  auto* gen = app.add_subcommand("generate", "synthesize a workflow from a generator spec");
  std::string genspec;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--genspec", genspec, "generator spec")->required()->check(CLI::ExistingFile);
  gen->add_option("--system", in.system, "devices the workflow targets")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "overrides the spec seed");
  gen->add_option("--out", out, "workflow.json path");

  auto* transform = app.add_subcommand("transform", "dump the expanded and candidate graphs");
  add_inputs(transform, in);
  transform->add_option("--out", out, "output directory");

  auto* solve = app.add_subcommand("solve", "solve one weighted problem");
  add_inputs(solve, in);
  solve->add_option("--out", out, "plan.json path");

  auto* sweep = app.add_subcommand("sweep", "solve over a grid of weights");
  add_inputs(sweep, in);
  std::optional<double> step;
  unsigned workers = 1;
  sweep->add_option("--step", step, "w_rel increment")->check(CLI::Range(1e-6, 1.0));
  sweep->add_option("--workers", workers, "parallel solves")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output directory");

  auto* baseline = app.add_subcommand("baseline", "compare with single-device allocations");
  add_inputs(baseline, in);
  baseline->add_option("--out", out, "report.json path");

  auto* validate = app.add_subcommand("validate", "re-check a plan from first principles");
  add_inputs(validate, in);
  std::string plan;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  validate->add_option("--plan", plan, "plan.json to check")->required()->check(CLI::ExistingFile);
  validate->add_option("--samples", samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  validate->add_option("--seed", seed, "Monte Carlo seed");
  validate->add_option("--out", out, "report.json path");

  auto* exp = app.add_subcommand("export-mps", "write the model as fixed-format MPS");
  add_inputs(exp, in);
  std::string objective = "g";
  std::vector<double> bounds;
  exp->add_option("--objective", objective, "g, or a single raw objective for computing bounds externally")
      ->check(CLI::IsMember({"g", "rel-max", "rel-min", "lat-max", "lat-min"}));
  exp->add_option("--bounds", bounds, "rel_min rel_max lat_min lat_max, skips the built-in bound solves")
      ->expected(4);
  exp->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(genspec, in.system, gen_seed, out);
    if (*transform) return cmd_transform(in, out);
    if (*solve) return cmd_solve(in, out);
    if (*sweep) return cmd_sweep(in, step, workers, out);
    if (*baseline) return cmd_baseline(in, out);
    if (*validate) return cmd_validate(in, plan, samples, seed, out);
    if (*exp) return cmd_export(in, objective, bounds, out);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
