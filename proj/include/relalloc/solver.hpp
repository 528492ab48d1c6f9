#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relalloc/bilp.hpp"

namespace relalloc {

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

enum class SolverMode { Builtin, ExportOnly, External };

struct SolverOptions {
  SolverMode mode = SolverMode::Builtin;
  std::optional<double> time_limit;  // seconds
  double absolute_gap = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, TimeLimit };

const char* to_string(SolveStatus s);

/// Process exit code for a solve outcome: 0 optimal, 2 infeasible, 3 time limit.
int exit_code(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<std::uint8_t> values;  // one 0/1 entry per catalog variable
  std::vector<std::size_t> choice;   // selected candidate index per task
  double objective = 0.0;
  double bound = 0.0;
  std::size_t nodes = 0;
};

/// Exact branch-and-bound over the one-candidate-per-task structure.
///
/// The search fixes one candidate per task in ascending task order, trying
/// candidates in ascending index order. Every other variable is implied by the
/// chosen candidates: replica and set variables follow their candidate, arc
/// variables are the AND of their endpoint sets. Upper bounds relax the
/// coupling between unfixed tasks; budget rows whose coefficients are all
/// non-negative prune partial assignments. Ties within 1e-11 (relative) are
/// resolved towards the lexicographically smallest choice vector.
Solution solve_builtin(const BilpModel& model, const SolverOptions& opts = {});

/// Expands a per-task candidate choice to a full 0/1 assignment.
std::vector<std::uint8_t> expand_choice(const VariableCatalog& catalog,
                                        const std::vector<std::size_t>& choice);

struct Violation {
  std::string row;
  std::string tag;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

FeasibilityReport verify(const BilpModel& model, const std::vector<std::uint8_t>& values,
                         double tolerance = 1e-9);

/// Writes fixed-format MPS (binary columns as BV bounds, OBJSENSE MAX) and a
/// JSON sidecar mapping column and row names back to their meaning.
void export_mps(const BilpModel& model, const std::filesystem::path& mps_path,
                const std::filesystem::path& sidecar_path);

/// Reads a model written by export_mps. The sidecar restores the catalog.
BilpModel read_mps(const std::filesystem::path& mps_path,
                   const std::filesystem::path& sidecar_path);

/// Parses "<name> <value>" lines (blank and '#' lines ignored). Unlisted
/// variables are 0. Values must lie within 1e-6 of 0 or 1.
Solution read_solution(const std::filesystem::path& path, const VariableCatalog& catalog);

}  // namespace relalloc
