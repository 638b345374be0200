#pragma once

#include <cstdint>
#include <vector>

#include "opiniongames/errors.hpp"

namespace opg {

/// Uniform time grid over [0, t]. Grid points are computed as k*(t/steps),
/// never by accumulation.
struct TimeGrid {
  double t = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double horizon, int n_steps);

  double ds() const { return t / steps; }
  double s(int k) const { return k * (t / steps); }
};

uint64_t splitmix64(uint64_t& state);

/// Deterministic hash of (seed, replica, agent): the root of each agent's
/// substream. Changing the agent count never reshuffles other agents' noise.
uint64_t substream_seed(uint64_t root_seed, uint64_t replica, uint64_t agent);

/// Brownian increments dB ~ N(0, ds) per agent and step, drawn from
/// independent per-agent substreams of one root seed. Increments for the
/// multiplier block of the stacked system default to zero paths.
struct NoisePaths {
  uint64_t seed = 0;
  uint64_t replica = 0;
  double ds = 0.0;
  std::vector<std::vector<double>> increments;  // [agent][step]

  static NoisePaths generate(uint64_t root_seed, uint64_t replica,
                             int n_agents, const TimeGrid& grid);
  /// All-zero increments (deterministic reductions).
  static NoisePaths zero(int n_agents, const TimeGrid& grid);

  int agents() const { return static_cast<int>(increments.size()); }
  /// Cumulative path value B(s_k) = sum of increments before k.
  std::vector<double> path(int agent) const;
  /// Streams for a subset of agents (0-based), in the given order.
  NoisePaths select(const std::vector<int>& agent_indices) const;
};

}  // namespace opg
