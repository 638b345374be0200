#include "opiniongames/noise.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace opg {

TimeGrid::TimeGrid(double horizon, int n_steps) : t(horizon), steps(n_steps) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    fail(ErrorKind::Domain, "time grid: horizon must be positive and finite");
  }
  if (steps < 1) {
    std::ostringstream msg;
    msg << "time grid: steps=" << steps << " must be >= 1";
    fail(ErrorKind::Domain, msg.str());
  }
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t substream_seed(uint64_t root_seed, uint64_t replica, uint64_t agent) {
  uint64_t state = root_seed;
  uint64_t mixed = splitmix64(state);
  state ^= 0x632be59bd9b4e019ULL + replica;
  mixed ^= splitmix64(state);
  state ^= 0x9e3779b97f4a7c15ULL * (agent + 1);
  mixed ^= splitmix64(state);
  return mixed;
}

NoisePaths NoisePaths::generate(uint64_t root_seed, uint64_t replica,
                                int n_agents, const TimeGrid& grid) {
  NoisePaths np;
  np.seed = root_seed;
  np.replica = replica;
  np.ds = grid.ds();
  np.increments.resize(n_agents);
  const double sd = std::sqrt(grid.ds());
  for (int a = 0; a < n_agents; ++a) {
    std::mt19937_64 rng(substream_seed(root_seed, replica, a));
    std::normal_distribution<double> normal(0.0, sd);
    auto& row = np.increments[a];
    row.resize(grid.steps);
    for (int k = 0; k < grid.steps; ++k) row[k] = normal(rng);
  }
  return np;
}

NoisePaths NoisePaths::zero(int n_agents, const TimeGrid& grid) {
  NoisePaths np;
  np.ds = grid.ds();
  np.increments.assign(n_agents, std::vector<double>(grid.steps, 0.0));
  return np;
}

std::vector<double> NoisePaths::path(int agent) const {
  const auto& row = increments.at(agent);
  std::vector<double> cumulative(row.size() + 1, 0.0);
  for (std::size_t k = 0; k < row.size(); ++k) {
    cumulative[k + 1] = cumulative[k] + row[k];
  }
  return cumulative;
}

NoisePaths NoisePaths::select(const std::vector<int>& agent_indices) const {
  NoisePaths out;
  out.seed = seed;
  out.replica = replica;
  out.ds = ds;
  out.increments.reserve(agent_indices.size());
  for (int a : agent_indices) out.increments.push_back(increments.at(a));
  return out;
}

}  // namespace opg
