#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opiniongames/coefficients.hpp"
#include "opiniongames/equilibrium.hpp"
#include "opiniongames/network.hpp"
#include "opiniongames/noise.hpp"

namespace opg {

enum class RegimeKind { FullConsensus, Leader, Follower };

struct RegimeConfig {
  RegimeKind kind = RegimeKind::FullConsensus;
  double sigma = 0.0;
  double sigma1 = 0.0;              // leader diffusion
  double w_bar = 0.0;               // weight the leader assigns
  std::vector<double> x_tilde;      // leader-assigned opinions, agents != leader
  std::optional<double> x_bar1;     // fixed leader opinion (follower runs)
  std::vector<double> x_star_hint;  // optional profile enabling the x_tilde default
  std::string control_policy = "equilibrium";  // or "zero"
};

struct MonteCarloConfig {
  int replicas = 1;
  uint64_t seed = 0;
  int replica_offset = 0;
};

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 200;
  FollowerDriftSign follower_drift_sign = FollowerDriftSign::Statement;
  std::optional<double> solve_time;  // defaults to t/2

  double solve_time_or_default(double t) const {
    return solve_time ? *solve_time : 0.5 * t;
  }
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
};

/// One self-describing document per run; flags only pick the subcommand and
/// paths. Round-trips losslessly through serialize/parse.
struct ScenarioConfig {
  NetworkSpec network;
  std::vector<double> initial_opinions;
  RegimeConfig regime;
  HParams h_params;
  std::vector<MultiplierModel> multipliers;  // per agent
  TimeGrid grid{1.0, 1000};
  MonteCarloConfig monte_carlo;
  SolverConfig solver;
  OutputConfig outputs;
};

/// Parse + validate a config document (JSON). Errors carry the field path,
/// e.g. "network.edges[0].w". Omitted optional fields get documented defaults.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

/// Canonical serialization; parse(serialize(cfg)) is a fixed point.
std::string serialize_scenario(const ScenarioConfig& cfg);

/// FNV-1a over the canonical serialization; the reproducibility fingerprint.
uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace opg
