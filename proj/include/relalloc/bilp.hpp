#pragma once

// Binary integer linear program over a candidate graph.
//
// Variables: one per candidate node, one per candidate-graph arc, one per
// replica of every candidate, and one per candidate set (task x primary
// device). Rows: one-candidate-per-task choice, set linking, replica linking,
// out-degree, arc AND-linearization, and per-device memory / storage / energy
// budgets. The combined objective is the weighted sum of normalized
// log-reliability and negated normalized latency, maximized.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relalloc/transform.hpp"

namespace relalloc {

struct SolverOptions;

enum class VarKind { Candidate, Arc, Replica, Set };

const char* to_string(VarKind kind);

struct Variable {
  VarKind kind = VarKind::Candidate;
  std::string name;   // MPS-safe column name, <= 8 characters
  std::string label;  // human readable: candidate id, arc endpoints, ...
  TaskIndex task = 0;         // owning task (parent task for arcs)
  TaskIndex child_task = 0;   // arcs only
  std::size_t candidate = 0;  // candidate / replica only: index within task
  int slot = 0;               // replica only
  DeviceIndex device = 0;     // primary / set / replica device; arc source
  DeviceIndex to_device = 0;  // arcs only
  std::size_t arc = 0;        // arcs only: index into CandidateGraph::arcs
};

using SparseRow = std::vector<std::pair<std::size_t, double>>;

/// Index of every model variable with lookup tables in both directions.
class VariableCatalog {
 public:
  VariableCatalog() = default;
  explicit VariableCatalog(std::vector<Variable> vars);

  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& at(std::size_t v) const { return vars_.at(v); }
  std::size_t size() const { return vars_.size(); }
  std::size_t task_count() const { return candidate_vars_.size(); }

  std::size_t count(VarKind kind) const;
  std::optional<std::size_t> find(const std::string& name) const;

  const std::vector<std::size_t>& candidates_of(TaskIndex i) const { return candidate_vars_.at(i); }
  std::size_t candidate_var(TaskIndex i, std::size_t c) const { return candidate_vars_.at(i).at(c); }
  const std::vector<std::size_t>& replicas_of(TaskIndex i, std::size_t c) const {
    return replica_vars_.at(i).at(c);
  }
  std::optional<std::size_t> set_var(TaskIndex i, DeviceIndex k) const;
  const std::vector<std::size_t>& arc_vars() const { return arc_vars_; }

 private:
  std::vector<Variable> vars_;
  std::map<std::string, std::size_t> by_name_;
  std::vector<std::vector<std::size_t>> candidate_vars_;
  std::vector<std::vector<std::vector<std::size_t>>> replica_vars_;
  std::vector<std::map<DeviceIndex, std::size_t>> set_vars_;
  std::vector<std::size_t> arc_vars_;
};

enum class Sense { LessEqual, Equal, GreaterEqual };

struct LinearConstraint {
  SparseRow terms;  // sorted by variable, no duplicates, no zeros
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string name;  // MPS-safe row name
  std::string tag;   // provenance: producing rule and entity
};

struct NormalizationBounds {
  double rel_min = 0.0;
  double rel_max = 0.0;
  double lat_min = 0.0;
  double lat_max = 0.0;
};

struct ObjectiveWeights {
  double rel = 0.5;
  double lat = 0.5;

  void validate() const;
};

struct ModelMetadata {
  std::string name = "relalloc";
  int criticality_level = 0;
  std::optional<ObjectiveWeights> weights;
  std::optional<NormalizationBounds> bounds;
};

struct BilpModel {
  VariableCatalog catalog;
  std::vector<LinearConstraint> constraints;
  SparseRow objective;  // maximized
  double objective_offset = 0.0;
  // raw objective terms, kept for normalization and reporting
  SparseRow reliability_terms;  // ln(R) per candidate
  SparseRow latency_terms;      // seconds per candidate and arc
  ModelMetadata metadata;

  std::size_t count_rows(const std::string& tag_prefix) const;
};

/// Creates the variable catalog and all constraint rows. Objective stays empty;
/// the reliability and latency terms are attached for later weighting.
BilpModel assemble_constraints(const CandidateGraph& reg);

VariableCatalog build_catalog(const CandidateGraph& reg);

SparseRow objective_reliability(const CandidateGraph& reg, const VariableCatalog& catalog);
SparseRow objective_latency(const CandidateGraph& reg, const VariableCatalog& catalog);

/// Evaluates a sparse linear form at a 0/1 assignment.
double evaluate(const SparseRow& row, const std::vector<std::uint8_t>& values);

/// Optimizes f_rel and f_lat in both directions over the model's constraints.
/// Throws Error if the constraint set is infeasible.
NormalizationBounds normalization_bounds(const BilpModel& model, const SolverOptions& opts);

/// Normalized value of one objective; zero when the span is degenerate.
double normalize(double value, double lo, double hi);

/// Fills in the combined objective g, folding constant offsets into
/// objective_offset.
BilpModel weighted_objective(BilpModel model, const NormalizationBounds& bounds,
                             const ObjectiveWeights& w);

}  // namespace relalloc
