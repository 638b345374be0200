#pragma once

#include <string>
#include <vector>

#include "opiniongames/config.hpp"
#include "opiniongames/sde.hpp"

namespace opg {

/// Per-agent solve context the harness assembles once per run: everything a
/// feedback policy or an equilibrium solve needs besides (s, x).
struct AgentSolveContext {
  GameRegime regime;
  CoefficientParams cp;
  MultiplierModel multiplier;
  double x0 = 0.0;
  double x_j = 0.0;
  double mean_opt = 0.0;
};

ControlPolicy make_equilibrium_policy(std::vector<AgentSolveContext> ctx,
                                      HParams hp);

/// Power-of-two aligned block of replica statistics. Blocks fuse pairwise
/// bottom-up (lower sibling first), so the set of blocks covering a replica
/// range, and every floating-point sum inside them, depends only on the set
/// of replica indices, never on merge order or thread count.
struct ReplicaBlock {
  uint64_t start = 0;
  uint64_t count = 0;  // power of two; start is count-aligned
  std::vector<double> spread_sum;                // per time point
  std::vector<std::vector<double>> opinion_sum;  // [agent][time]
  std::vector<long> excursions;                  // per agent
  long gap_pairs = 0;
  long gap_passes = 0;
};

/// Replica-mergeable ensemble statistics with an exactly associative,
/// order-independent reduction.
struct EnsembleSummary {
  TimeGrid grid;
  int agents = 0;
  std::vector<int> agent_ids;  // 1-based ids of the simulated agents

  std::vector<ReplicaBlock> blocks;  // canonical: fused, sorted by start
  std::vector<std::pair<uint64_t, std::vector<double>>>
      spread_rows;  // per replica: spread over time (for the quantile band)

  std::vector<double> x_star;    // equilibrium profile snapshot
  std::vector<double> phi_star;  // feedback controls at the solve state

  uint64_t first_replica = 0;
  OpinionPath first_path;  // trajectory of the lowest replica index

  long replicas() const;
  long gap_pairs() const;
  long gap_passes() const;
  double gap_pass_rate() const;
  std::vector<long> excursion_totals() const;
  std::vector<double> spread_mean() const;
  std::vector<double> spread_quantile(double q) const;  // nearest-rank
  std::vector<std::vector<double>> opinion_mean() const;
};

/// Order-independent, associative replica reduction: pooled statistics of
/// split runs are bit-identical to one combined run.
EnsembleSummary merge(const EnsembleSummary& a, const EnsembleSummary& b);

struct EquilibriumSolve {
  std::vector<int> agent_ids;  // 1-based, same order as x_star/phi_star
  std::vector<double> x_star;
  std::vector<double> phi_star;
  double x_bar1 = 0.0;  // leader's chosen opinion (leader/follower runs)
  int mean_field_iterations = 0;
};

/// Equilibrium solve only (the `solve` subcommand): leader runs fix the
/// leader's opinion at the maximum real root before the followers solve.
EquilibriumSolve solve_equilibrium(const ScenarioConfig& cfg);

/// Full ensemble run: solve, then Monte Carlo over replicas, then metrics.
EnsembleSummary run_scenario(const ScenarioConfig& cfg);

}  // namespace opg
