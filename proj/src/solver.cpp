#include "relalloc/solver.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include <fmt/format.h>

namespace relalloc {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "OPTIMAL";
    case SolveStatus::Infeasible: return "INFEASIBLE";
    case SolveStatus::TimeLimit: return "TIME_LIMIT";
  }
  return "?";
}

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::Infeasible: return 2;
    case SolveStatus::TimeLimit: return 3;
  }
  return 1;
}

std::vector<std::uint8_t> expand_choice(const VariableCatalog& catalog,
                                        const std::vector<std::size_t>& choice) {
  std::vector<std::uint8_t> x(catalog.size(), 0);
  std::vector<DeviceIndex> primary(choice.size(), 0);
  for (TaskIndex t = 0; t < choice.size(); ++t) {
    const auto cv = catalog.candidate_var(t, choice[t]);
    x[cv] = 1;
    primary[t] = catalog.at(cv).device;
    for (auto r : catalog.replicas_of(t, choice[t])) x[r] = 1;
    if (auto s = catalog.set_var(t, primary[t])) x[*s] = 1;
  }
  for (auto v : catalog.arc_vars()) {
    const auto& a = catalog.at(v);
    if (primary.at(a.task) == a.device && primary.at(a.child_task) == a.to_device) x[v] = 1;
  }
  return x;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

double tie_tolerance(double v) { return 1e-11 * std::max(1.0, std::abs(v)); }

double row_tolerance(double rhs, double tol) { return tol * std::max(1.0, std::abs(rhs)); }

bool row_satisfied(const LinearConstraint& row, double lhs, double tol) {
  const double eps = row_tolerance(row.rhs, tol);
  switch (row.sense) {
    case Sense::LessEqual: return lhs <= row.rhs + eps;
    case Sense::Equal: return std::abs(lhs - row.rhs) <= eps;
    case Sense::GreaterEqual: return lhs >= row.rhs - eps;
  }
  return false;
}

// Arc variables between two tasks, addressed by (parent primary, child primary).
struct TaskArc {
  TaskIndex parent = 0;
  TaskIndex child = 0;
  std::vector<std::size_t> var;  // devices * devices, kNone when absent
  std::vector<double> best_from;  // per parent device: max over child devices
  bool tree = false;              // part of the spanning forest used by the bound
};

using RowTerms = std::vector<std::pair<std::size_t, double>>;  // (resource row, amount)

class BranchAndBound {
 public:
  BranchAndBound(const BilpModel& model, const SolverOptions& opts)
      : model_(model), cat_(model.catalog), opts_(opts) {
    build();
  }

  Solution run();

 private:
  void build();
  double pair_value(std::size_t e, DeviceIndex from, DeviceIndex to) const;
  double pair_penalized(std::size_t e, DeviceIndex from, DeviceIndex to) const;
  std::size_t arc_var(std::size_t e, DeviceIndex from, DeviceIndex to) const;
  bool fits(TaskIndex t, std::size_t j, std::size_t depth_fixed) const;
  double full_value(const std::vector<std::size_t>& choice, bool& feasible) const;
  void improve(std::vector<std::size_t>& choice, double& value) const;
  double local_gain(TaskIndex t, std::size_t j) const;
  double penalized_gain(TaskIndex t, std::size_t j) const;
  void set_multipliers(const std::vector<double>& mu);
  std::vector<std::size_t> decode(std::size_t depth) const;
  void tune_multipliers();
  void apply(TaskIndex t, std::size_t j, double sign);
  double node_bound(std::size_t depth, bool& infeasible) const;
  bool leaf_feasible() const;
  void consider_leaf();
  void search(std::size_t depth);
  void greedy();
  bool out_of_time();
  bool tie_can_win(std::size_t depth) const;
  bool rooted(TaskIndex t, std::size_t depth) const {
    return tree_parent_[t] == kNone || tree_parent_[t] < depth;
  }

  const BilpModel& model_;
  const VariableCatalog& cat_;
  SolverOptions opts_;

  std::size_t tasks_ = 0;
  std::size_t devices_ = 0;
  std::vector<double> coef_;
  std::vector<std::vector<DeviceIndex>> primary_;
  std::vector<std::vector<double>> unary_;
  std::vector<std::vector<RowTerms>> cand_rows_;
  std::vector<RowTerms> var_rows_;  // per variable (used for arc variables)
  std::vector<TaskArc> arcs_;
  std::vector<std::vector<std::size_t>> arcs_of_;
  std::vector<std::size_t> resource_rows_;  // model row index per resource row
  std::vector<std::size_t> other_rows_;
  std::vector<double> capacity_;
  std::vector<std::vector<double>> suffix_min_;  // [depth][resource row]
  std::vector<TaskIndex> reverse_topo_;
  std::vector<TaskIndex> tree_parent_;
  std::vector<std::vector<std::size_t>> out_arcs_;  // arcs by parent task
  mutable std::vector<double> scratch_;
  mutable std::vector<double> h_;  // tasks * devices
  mutable std::vector<std::size_t> arg_;  // best candidate per (task, device)
  // Lagrangian penalties on resource rows
  std::vector<double> mu_;
  std::vector<double> pcoef_;
  std::vector<std::vector<double>> punary_;

  // search state
  std::vector<std::size_t> choice_;
  std::vector<double> usage_;
  double value_ = 0.0;
  std::vector<double> bound_stack_;

  bool have_incumbent_ = false;
  std::vector<std::size_t> best_choice_;
  double best_value_ = -kInf;

  std::size_t nodes_ = 0;
  bool timed_out_ = false;
  std::chrono::steady_clock::time_point start_;
};

std::size_t BranchAndBound::arc_var(std::size_t e, DeviceIndex from, DeviceIndex to) const {
  return arcs_[e].var[from * devices_ + to];
}

double BranchAndBound::pair_value(std::size_t e, DeviceIndex from, DeviceIndex to) const {
  const auto v = arc_var(e, from, to);
  return v == kNone ? 0.0 : coef_[v];
}

double BranchAndBound::pair_penalized(std::size_t e, DeviceIndex from, DeviceIndex to) const {
  const auto v = arc_var(e, from, to);
  return v == kNone ? 0.0 : pcoef_[v];
}

void BranchAndBound::set_multipliers(const std::vector<double>& mu) {
  mu_ = mu;
  pcoef_ = coef_;
  for (std::size_t v = 0; v < pcoef_.size(); ++v)
    for (const auto& [r, c] : var_rows_[v]) pcoef_[v] -= mu_[r] * c;
  punary_.assign(tasks_, {});
  for (TaskIndex t = 0; t < tasks_; ++t) {
    punary_[t] = unary_[t];
    for (std::size_t j = 0; j < unary_[t].size(); ++j)
      for (const auto& [r, c] : cand_rows_[t][j]) punary_[t][j] -= mu_[r] * c;
  }
  for (auto& a : arcs_) {
    a.best_from.assign(devices_, -kInf);
    for (DeviceIndex k = 0; k < devices_; ++k)
      for (DeviceIndex l = 0; l < devices_; ++l) {
        const auto v = a.var[k * devices_ + l];
        a.best_from[k] = std::max(a.best_from[k], v == kNone ? 0.0 : pcoef_[v]);
      }
  }
}

void BranchAndBound::build() {
  tasks_ = cat_.task_count();
  for (const auto& v : cat_.variables())
    devices_ = std::max({devices_, v.device + 1, v.to_device + 1});

  coef_.assign(cat_.size(), 0.0);
  for (const auto& [v, c] : model_.objective) coef_.at(v) += c;

  // rows with only non-negative coefficients and <= sense can prune partial
  // assignments, since every later decision only adds to their left side
  var_rows_.assign(cat_.size(), {});
  for (std::size_t r = 0; r < model_.constraints.size(); ++r) {
    const auto& row = model_.constraints[r];
    const bool monotone =
        row.sense == Sense::LessEqual &&
        std::all_of(row.terms.begin(), row.terms.end(), [](const auto& t) { return t.second >= 0.0; });
    if (!monotone) {
      other_rows_.push_back(r);
      continue;
    }
    const std::size_t local = resource_rows_.size();
    resource_rows_.push_back(r);
    capacity_.push_back(row.rhs + row_tolerance(row.rhs, 1e-9));
    for (const auto& [v, c] : row.terms) var_rows_[v].emplace_back(local, c);
  }

  primary_.resize(tasks_);
  unary_.resize(tasks_);
  cand_rows_.resize(tasks_);
  for (TaskIndex t = 0; t < tasks_; ++t) {
    const auto& cands = cat_.candidates_of(t);
    for (std::size_t j = 0; j < cands.size(); ++j) {
      const auto cv = cands[j];
      const DeviceIndex k = cat_.at(cv).device;
      std::vector<std::size_t> implied{cv};
      for (auto r : cat_.replicas_of(t, j)) implied.push_back(r);
      if (auto s = cat_.set_var(t, k)) implied.push_back(*s);
      double u = 0.0;
      RowTerms rows;
      for (auto v : implied) {
        u += coef_[v];
        rows.insert(rows.end(), var_rows_[v].begin(), var_rows_[v].end());
      }
      std::sort(rows.begin(), rows.end());
      RowTerms merged;
      for (const auto& [r, c] : rows) {
        if (!merged.empty() && merged.back().first == r)
          merged.back().second += c;
        else
          merged.emplace_back(r, c);
      }
      primary_[t].push_back(k);
      unary_[t].push_back(u);
      cand_rows_[t].push_back(std::move(merged));
    }
  }

  std::map<std::pair<TaskIndex, TaskIndex>, std::size_t> arc_index;
  arcs_of_.assign(tasks_, {});
  for (auto v : cat_.arc_vars()) {
    const auto& a = cat_.at(v);
    auto [it, fresh] = arc_index.emplace(std::make_pair(a.task, a.child_task), arcs_.size());
    if (fresh) {
      TaskArc ta;
      ta.parent = a.task;
      ta.child = a.child_task;
      ta.var.assign(devices_ * devices_, kNone);
      arcs_.push_back(std::move(ta));
      arcs_of_[a.task].push_back(it->second);
      arcs_of_[a.child_task].push_back(it->second);
    }
    auto& ta = arcs_[it->second];
    ta.var[a.device * devices_ + a.to_device] = v;
  }
  out_arcs_.assign(tasks_, {});
  std::vector<bool> has_tree_parent(tasks_, false);
  tree_parent_.assign(tasks_, kNone);
  for (std::size_t e = 0; e < arcs_.size(); ++e) {
    auto& ta = arcs_[e];
    out_arcs_[ta.parent].push_back(e);
    if (!has_tree_parent[ta.child]) {
      has_tree_parent[ta.child] = true;
      ta.tree = true;
      tree_parent_[ta.child] = ta.parent;
    }
  }

  // reverse topological order over the arc structure
  std::vector<std::size_t> indeg(tasks_, 0);
  for (const auto& ta : arcs_) ++indeg[ta.child];
  std::vector<TaskIndex> order;
  for (TaskIndex t = 0; t < tasks_; ++t)
    if (indeg[t] == 0) order.push_back(t);
  for (std::size_t q = 0; q < order.size(); ++q)
    for (auto e : out_arcs_[order[q]])
      if (--indeg[arcs_[e].child] == 0) order.push_back(arcs_[e].child);
  if (order.size() != tasks_) throw Error("arc variables form a cycle");
  reverse_topo_.assign(order.rbegin(), order.rend());
  scratch_.assign(resource_rows_.size(), 0.0);
  h_.assign(tasks_ * devices_, -kInf);
  arg_.assign(tasks_ * devices_, kNone);
  set_multipliers(std::vector<double>(resource_rows_.size(), 0.0));

  suffix_min_.assign(tasks_ + 1, std::vector<double>(resource_rows_.size(), 0.0));
  for (std::size_t t = tasks_; t-- > 0;) {
    std::vector<double> lo(resource_rows_.size(), kInf);
    for (const auto& rows : cand_rows_[t]) {
      std::vector<double> amount(resource_rows_.size(), 0.0);
      for (const auto& [r, c] : rows) amount[r] = c;
      for (std::size_t r = 0; r < lo.size(); ++r) lo[r] = std::min(lo[r], amount[r]);
    }
    for (std::size_t r = 0; r < lo.size(); ++r)
      suffix_min_[t][r] = suffix_min_[t + 1][r] + (lo[r] == kInf ? 0.0 : lo[r]);
  }

  choice_.assign(tasks_, kNone);
  usage_.assign(resource_rows_.size(), 0.0);
}

// Objective gained by fixing candidate j of task t given the already fixed
// tasks: its unary terms plus arcs to fixed neighbours.
double BranchAndBound::local_gain(TaskIndex t, std::size_t j) const {
  double g = unary_[t][j];
  for (auto e : arcs_of_[t]) {
    const auto& a = arcs_[e];
    const TaskIndex other = a.parent == t ? a.child : a.parent;
    if (choice_[other] == kNone) continue;
    g += a.parent == t ? pair_value(e, primary_[t][j], primary_[other][choice_[other]])
                       : pair_value(e, primary_[other][choice_[other]], primary_[t][j]);
  }
  return g;
}

double BranchAndBound::penalized_gain(TaskIndex t, std::size_t j) const {
  double g = punary_[t][j];
  for (auto e : arcs_of_[t]) {
    const auto& a = arcs_[e];
    const TaskIndex other = a.parent == t ? a.child : a.parent;
    if (choice_[other] == kNone) continue;
    g += a.parent == t ? pair_penalized(e, primary_[t][j], primary_[other][choice_[other]])
                       : pair_penalized(e, primary_[other][choice_[other]], primary_[t][j]);
  }
  return g;
}

// Whether fixing j for t keeps every resource row within capacity, counting
// the cheapest possible completion of tasks from `depth_fixed` on.
bool BranchAndBound::fits(TaskIndex t, std::size_t j, std::size_t depth_fixed) const {
  auto& extra = scratch_;
  std::fill(extra.begin(), extra.end(), 0.0);
  for (const auto& [r, c] : cand_rows_[t][j]) extra[r] += c;
  for (auto e : arcs_of_[t]) {
    const auto& a = arcs_[e];
    const TaskIndex other = a.parent == t ? a.child : a.parent;
    if (choice_[other] == kNone) continue;
    const auto v = a.parent == t ? arc_var(e, primary_[t][j], primary_[other][choice_[other]])
                                 : arc_var(e, primary_[other][choice_[other]], primary_[t][j]);
    if (v == kNone) continue;
    for (const auto& [r, c] : var_rows_[v]) extra[r] += c;
  }
  const auto& rest = suffix_min_[depth_fixed];
  const auto& own = suffix_min_[t];
  const auto& after = suffix_min_[t + 1];
  for (std::size_t r = 0; r < extra.size(); ++r) {
    // minimum completion excluding task t itself
    const double completion = rest[r] - (t >= depth_fixed ? own[r] - after[r] : 0.0);
    if (usage_[r] + extra[r] + completion > capacity_[r]) return false;
  }
  return true;
}

void BranchAndBound::apply(TaskIndex t, std::size_t j, double sign) {
  for (const auto& [r, c] : cand_rows_[t][j]) usage_[r] += sign * c;
  for (auto e : arcs_of_[t]) {
    const auto& a = arcs_[e];
    const TaskIndex other = a.parent == t ? a.child : a.parent;
    if (choice_[other] == kNone) continue;
    const auto v = a.parent == t ? arc_var(e, primary_[t][j], primary_[other][choice_[other]])
                                 : arc_var(e, primary_[other][choice_[other]], primary_[t][j]);
    if (v == kNone) continue;
    for (const auto& [r, c] : var_rows_[v]) usage_[r] += sign * c;
  }
}

// Forest relaxation of the penalized problem: every unfixed task keeps the
// arc to one parent, the value of the subtree below it is maximized per
// primary device, and remaining arcs between unfixed tasks are charged to the
// parent at their best value. Resource rows enter through their multipliers.
double BranchAndBound::node_bound(std::size_t depth, bool& infeasible) const {
  infeasible = false;
  double bound = value_;
  for (std::size_t r = 0; r < mu_.size(); ++r) bound += mu_[r] * (capacity_[r] - usage_[r]);
  auto h = [&](TaskIndex t, DeviceIndex k) -> double& { return h_[t * devices_ + k]; };
  for (auto t : reverse_topo_) {
    if (t < depth) continue;
    for (DeviceIndex k = 0; k < devices_; ++k) {
      h(t, k) = -kInf;
      arg_[t * devices_ + k] = kNone;
    }
    for (std::size_t j = 0; j < unary_[t].size(); ++j) {
      if (!resource_rows_.empty() && !fits(t, j, depth)) continue;
      const DeviceIndex k = primary_[t][j];
      const double g = penalized_gain(t, j);
      if (g > h(t, k)) {
        h(t, k) = g;
        arg_[t * devices_ + k] = j;
      }
    }
    for (DeviceIndex k = 0; k < devices_; ++k) {
      if (h(t, k) == -kInf) continue;
      for (auto e : out_arcs_[t]) {
        const auto& a = arcs_[e];
        if (a.child < depth) continue;
        if (!a.tree) {
          h(t, k) += a.best_from[k];
          continue;
        }
        double best = -kInf;
        for (DeviceIndex l = 0; l < devices_; ++l)
          if (h(a.child, l) != -kInf) best = std::max(best, pair_penalized(e, k, l) + h(a.child, l));
        h(t, k) += best;
        if (best == -kInf) break;
      }
    }
  }
  for (TaskIndex t = depth; t < tasks_; ++t) {
    if (!rooted(t, depth)) continue;
    double best = -kInf;
    for (DeviceIndex k = 0; k < devices_; ++k) best = std::max(best, h(t, k));
    if (best == -kInf) {
      infeasible = true;
      return -kInf;
    }
    bound += best;
  }
  return bound;
}

// Assignment of the unfixed tasks read back from the last node_bound call.
std::vector<std::size_t> BranchAndBound::decode(std::size_t depth) const {
  auto choice = choice_;
  std::vector<DeviceIndex> dev(tasks_, 0);
  for (TaskIndex t = 0; t < depth; ++t) dev[t] = primary_[t][choice[t]];
  for (auto it = reverse_topo_.rbegin(); it != reverse_topo_.rend(); ++it) {
    const TaskIndex t = *it;
    if (t < depth) continue;
    DeviceIndex pick = 0;
    double best = -kInf;
    std::optional<std::size_t> via;
    for (auto e : arcs_of_[t])
      if (arcs_[e].child == t && arcs_[e].tree && arcs_[e].parent >= depth) via = e;
    for (DeviceIndex l = 0; l < devices_; ++l) {
      const double hv = h_[t * devices_ + l];
      if (hv == -kInf) continue;
      const double v = via ? pair_penalized(*via, dev[arcs_[*via].parent], l) + hv : hv;
      if (v > best) {
        best = v;
        pick = l;
      }
    }
    dev[t] = pick;
    choice[t] = arg_[t * devices_ + pick];
    if (choice[t] == kNone) choice[t] = 0;
  }
  return choice;
}

// Subgradient ascent on the resource multipliers at the root.
void BranchAndBound::tune_multipliers() {
  if (resource_rows_.empty() || tasks_ == 0) return;
  std::vector<double> scale(resource_rows_.size(), 1.0);
  for (std::size_t r = 0; r < scale.size(); ++r)
    if (capacity_[r] > 0.0) scale[r] = capacity_[r];
  std::vector<double> best_mu = mu_;
  bool infeasible = false;
  double best_bound = node_bound(0, infeasible);
  if (infeasible) return;
  double lambda = 2.0;
  std::size_t stall = 0;
  for (int iter = 0; iter < 300 && lambda > 1e-6; ++iter) {
    const auto choice = decode(0);
    const auto x = expand_choice(cat_, choice);
    bool feasible = false;
    const double value = full_value(choice, feasible);
    if (feasible && (!have_incumbent_ || value > best_value_ + tie_tolerance(best_value_))) {
      have_incumbent_ = true;
      best_value_ = value;
      best_choice_ = choice;
    }
    std::vector<double> grad(resource_rows_.size(), 0.0);
    double norm = 0.0;
    for (std::size_t r = 0; r < grad.size(); ++r) {
      const auto& row = model_.constraints[resource_rows_[r]];
      grad[r] = (evaluate(row.terms, x) - capacity_[r]) / scale[r];
      if (mu_[r] > 0.0 || grad[r] > 0.0) norm += grad[r] * grad[r];
    }
    if (norm == 0.0) break;
    const double target = have_incumbent_ ? best_value_ : best_bound - 1.0;
    const double step = lambda * std::max(best_bound - target, 1e-9) / norm;
    std::vector<double> mu = mu_;
    for (std::size_t r = 0; r < mu.size(); ++r)
      mu[r] = std::max(0.0, mu[r] + step * grad[r] / scale[r]);
    set_multipliers(mu);
    const double bound = node_bound(0, infeasible);
    if (infeasible) return;
    if (bound < best_bound - tie_tolerance(best_bound)) {
      best_bound = bound;
      best_mu = mu_;
      stall = 0;
    } else if (++stall >= 10) {
      lambda /= 2.0;
      stall = 0;
    }
    if (have_incumbent_ && best_bound <= best_value_ + tie_tolerance(best_value_)) break;
  }
  set_multipliers(best_mu);
}

bool BranchAndBound::leaf_feasible() const {
  if (other_rows_.empty()) return true;
  const auto x = expand_choice(cat_, choice_);
  for (auto r : other_rows_) {
    const auto& row = model_.constraints[r];
    if (!row_satisfied(row, evaluate(row.terms, x), 1e-9)) return false;
  }
  return true;
}

void BranchAndBound::consider_leaf() {
#ifndef NDEBUG
  for (double b : bound_stack_) assert(value_ <= b + tie_tolerance(b));
#endif
  if (have_incumbent_) {
    const double tol = tie_tolerance(best_value_);
    if (value_ < best_value_ - tol) return;
    if (value_ <= best_value_ + tol && !(choice_ < best_choice_)) return;
  }
  if (!leaf_feasible()) return;
  have_incumbent_ = true;
  best_value_ = value_;
  best_choice_ = choice_;
}

// True when some assignment below the current prefix may be lexicographically
// smaller than the incumbent, so an objective tie could still replace it.
bool BranchAndBound::tie_can_win(std::size_t depth) const {
  for (std::size_t t = 0; t < depth; ++t) {
    if (choice_[t] < best_choice_[t]) return true;
    if (choice_[t] > best_choice_[t]) return false;
  }
  return true;
}

bool BranchAndBound::out_of_time() {
  if (timed_out_) return true;
  if (!opts_.time_limit || (nodes_ & 1023) != 0) return false;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  timed_out_ = elapsed > *opts_.time_limit;
  return timed_out_;
}

void BranchAndBound::search(std::size_t depth) {
  ++nodes_;
  if (out_of_time()) return;
  if (depth == tasks_) {
    consider_leaf();
    return;
  }
  bool infeasible = false;
  const double bound = node_bound(depth, infeasible);
  if (infeasible) return;
  if (have_incumbent_) {
    const double tol = tie_tolerance(best_value_);
    if (bound < best_value_ - tol) return;
    const double gap = std::max(opts_.absolute_gap, 0.0);
    if (bound <= best_value_ + std::max(tol, gap) && (gap > 0.0 || !tie_can_win(depth))) return;
  }
  bound_stack_.push_back(bound);
  const TaskIndex t = depth;
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t j = 0; j < unary_[t].size(); ++j) {
    if (!resource_rows_.empty() && !fits(t, j, depth)) continue;
    order.emplace_back(-penalized_gain(t, j), j);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [key, j] : order) {
    const double gain = local_gain(t, j);
    choice_[t] = j;
    apply(t, j, 1.0);
    value_ += gain;
    search(depth + 1);
    value_ -= gain;
    choice_[t] = kNone;
    apply(t, j, -1.0);
    if (timed_out_) break;
  }
  bound_stack_.pop_back();
}

double BranchAndBound::full_value(const std::vector<std::size_t>& choice, bool& feasible) const {
  const auto x = expand_choice(cat_, choice);
  feasible = true;
  for (const auto& row : model_.constraints)
    if (!row_satisfied(row, evaluate(row.terms, x), 1e-9)) {
      feasible = false;
      break;
    }
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) v += coef_[i];
  return v;
}

// First-improvement single-task moves until no move helps.
void BranchAndBound::improve(std::vector<std::size_t>& choice, double& value) const {
  for (bool moved = true; moved;) {
    moved = false;
    for (TaskIndex t = 0; t < tasks_; ++t) {
      const auto keep = choice[t];
      for (std::size_t j = 0; j < unary_[t].size(); ++j) {
        if (j == keep) continue;
        choice[t] = j;
        bool ok = false;
        const double v = full_value(choice, ok);
        if (ok && v > value + tie_tolerance(value)) {
          value = v;
          moved = true;
          break;
        }
        choice[t] = keep;
      }
    }
  }
}

void BranchAndBound::greedy() {
  for (TaskIndex t = 0; t < tasks_; ++t) {
    std::size_t pick = kNone;
    double best = -kInf;
    for (std::size_t j = 0; j < unary_[t].size(); ++j) {
      if (!resource_rows_.empty() && !fits(t, j, t)) continue;
      const double g = local_gain(t, j);
      if (g > best) {
        best = g;
        pick = j;
      }
    }
    if (pick == kNone) break;
    choice_[t] = pick;
    apply(t, pick, 1.0);
    value_ += best;
  }
  const bool complete =
      std::none_of(choice_.begin(), choice_.end(), [](std::size_t c) { return c == kNone; });
  if (complete && leaf_feasible()) {
    auto choice = choice_;
    double value = value_;
    improve(choice, value);
    have_incumbent_ = true;
    best_value_ = value;
    best_choice_ = choice;
  }
  // reset search state
  for (TaskIndex t = tasks_; t-- > 0;) {
    if (choice_[t] == kNone) continue;
    const auto j = choice_[t];
    choice_[t] = kNone;
    apply(t, j, -1.0);
  }
  std::fill(usage_.begin(), usage_.end(), 0.0);
  value_ = 0.0;
}

Solution BranchAndBound::run() {
  start_ = std::chrono::steady_clock::now();
  Solution sol;
  bool infeasible = false;
  double root_bound = tasks_ == 0 ? 0.0 : node_bound(0, infeasible);
  if (!infeasible) {
    greedy();
    tune_multipliers();
    if (tasks_ > 0) root_bound = node_bound(0, infeasible);
    if (!infeasible) search(0);
  }
  sol.nodes = nodes_;
  if (have_incumbent_) {
    sol.choice = best_choice_;
    sol.values = expand_choice(cat_, best_choice_);
    sol.objective = evaluate(model_.objective, sol.values) + model_.objective_offset;
  }
  if (timed_out_) {
    sol.status = SolveStatus::TimeLimit;
    sol.bound = root_bound + model_.objective_offset;
    if (!have_incumbent_) sol.objective = -kInf;
  } else if (have_incumbent_) {
    sol.status = SolveStatus::Optimal;
    sol.bound = sol.objective;
  } else {
    sol.status = SolveStatus::Infeasible;
    sol.objective = -kInf;
    sol.bound = -kInf;
  }
  return sol;
}

}  // namespace

Solution solve_builtin(const BilpModel& model, const SolverOptions& opts) {
  if (opts.absolute_gap < 0.0) throw ValidationError({"absolute_gap must be >= 0"});
  BranchAndBound bb(model, opts);
  return bb.run();
}

FeasibilityReport verify(const BilpModel& model, const std::vector<std::uint8_t>& values,
                         double tolerance) {
  if (values.size() != model.catalog.size())
    throw Error(fmt::format("assignment has {} entries, catalog has {}", values.size(),
                            model.catalog.size()));
  FeasibilityReport report;
  for (const auto& row : model.constraints) {
    const double lhs = evaluate(row.terms, values);
    if (!row_satisfied(row, lhs, tolerance))
      report.violations.push_back({row.name, row.tag, lhs, row.rhs});
  }
  return report;
}

}  // namespace relalloc
