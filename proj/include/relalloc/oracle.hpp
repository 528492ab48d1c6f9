#pragma once

// Reference evaluators that do not go through the BILP encoding: exhaustive
// enumeration of one-candidate-per-task choices and Monte Carlo sampling of
// replica failures.

#include <cstdint>
#include <vector>

#include "relalloc/bilp.hpp"

namespace relalloc {

/// Resource usage and objective values of a choice, computed directly from the
/// candidate graph.
struct ChoiceEvaluation {
  double reliability = 1.0;  // product of candidate reliabilities
  double f_rel = 0.0;        // ln(reliability)
  double f_lat = 0.0;        // seconds, candidates plus inter-task transfers
  std::vector<double> memory;   // bytes per device
  std::vector<double> storage;  // bytes per device
  std::vector<double> energy;   // joules per device
  std::vector<std::string> violations;

  bool feasible() const { return violations.empty(); }
};

ChoiceEvaluation evaluate_choice(const CandidateGraph& reg, const Topology& topo,
                                 const std::vector<std::size_t>& choice);

/// Weighted normalized objective evaluated without the linear encoding.
double direct_g(const ChoiceEvaluation& e, const NormalizationBounds& bounds,
                const ObjectiveWeights& w);

struct OracleResult {
  std::vector<std::size_t> best_choice;
  double best_g = 0.0;
  std::size_t feasible_count = 0;
  std::size_t enumerated_count = 0;
  // extremes of the raw objectives over feasible choices
  NormalizationBounds extremes;

  bool feasible() const { return feasible_count > 0; }
};

inline constexpr std::size_t kEnumerationGuard = 10'000'000;

/// Enumerates every choice in lexicographic order. Throws Error when the
/// number of choices exceeds kEnumerationGuard.
OracleResult brute_force(const CandidateGraph& reg, const Topology& topo,
                         const NormalizationBounds& bounds, const ObjectiveWeights& w);

struct MonteCarloEstimate {
  double estimate = 1.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Each inner vector lists the vulnerabilities of one task's selected
/// replicas. A task survives when any replica survives; a run survives when
/// every task does.
MonteCarloEstimate monte_carlo_reliability(const std::vector<std::vector<double>>& replicas,
                                           std::size_t samples, std::uint64_t seed);

}  // namespace relalloc
