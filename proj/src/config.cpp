#include "opiniongames/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace opg {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& why) {
  fail(ErrorKind::Config, path + ": " + why);
}

const json& require_field(const json& j, const std::string& path,
                          const std::string& key) {
  if (!j.is_object()) config_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_fail(path + "." + key, "missing required field");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_fail(path, "must be finite");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_fail(path, "expected an integer");
  return j.get<int>();
}

std::vector<double> as_number_list(const json& j, const std::string& path) {
  if (!j.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::ostringstream at;
    at << path << "[" << i << "]";
    out.push_back(as_number(j[i], at.str()));
  }
  return out;
}

NetworkSpec parse_network(const json& j) {
  NetworkSpec net;
  net.n = as_int(require_field(j, "network", "n"), "network.n");
  const json& edges = require_field(j, "network", "edges");
  if (!edges.is_array()) config_fail("network.edges", "expected an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::ostringstream at;
    at << "network.edges[" << e << "]";
    Edge edge;
    edge.i = as_int(require_field(edges[e], at.str(), "i"), at.str() + ".i");
    edge.j = as_int(require_field(edges[e], at.str(), "j"), at.str() + ".j");
    edge.weight =
        as_number(require_field(edges[e], at.str(), "w"), at.str() + ".w");
    if (edge.weight < 0.0) {
      config_fail(at.str() + ".w", "negative weight");
    }
    net.edges.push_back(edge);
  }
  net.stubbornness = as_number_list(
      require_field(j, "network", "stubbornness"), "network.stubbornness");
  if (j.contains("leader_id")) {
    net.leader_id = as_int(j["leader_id"], "network.leader_id");
  }
  const ValidationReport report = validate_network(net);
  if (!report.ok()) {
    std::string msg = "invalid network:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    config_fail("network", msg);
  }
  return net;
}

RegimeConfig parse_regime(const json& j, const NetworkSpec& net) {
  RegimeConfig rc;
  const std::string type = require_field(j, "regime", "type").is_string()
                               ? j["type"].get<std::string>()
                               : "";
  if (type == "full_consensus") {
    rc.kind = RegimeKind::FullConsensus;
  } else if (type == "leader") {
    rc.kind = RegimeKind::Leader;
  } else if (type == "follower") {
    rc.kind = RegimeKind::Follower;
  } else {
    config_fail("regime.type",
                "expected one of full_consensus|leader|follower");
  }
  rc.sigma = j.contains("sigma") ? as_number(j["sigma"], "regime.sigma") : 0.0;
  if (rc.sigma < 0.0) config_fail("regime.sigma", "must be >= 0");
  rc.sigma1 =
      j.contains("sigma1") ? as_number(j["sigma1"], "regime.sigma1") : 0.0;
  if (rc.sigma1 < 0.0) config_fail("regime.sigma1", "must be >= 0");
  rc.w_bar = j.contains("w_bar") ? as_number(j["w_bar"], "regime.w_bar") : 0.0;
  if (rc.w_bar < 0.0) config_fail("regime.w_bar", "must be >= 0");
  if (j.contains("x_tilde")) {
    rc.x_tilde = as_number_list(j["x_tilde"], "regime.x_tilde");
  }
  if (j.contains("x_star")) {
    rc.x_star_hint = as_number_list(j["x_star"], "regime.x_star");
  }
  if (j.contains("x_bar1")) {
    rc.x_bar1 = as_number(j["x_bar1"], "regime.x_bar1");
  }
  if (j.contains("control_policy")) {
    if (!j["control_policy"].is_string()) {
      config_fail("regime.control_policy", "expected a string");
    }
    rc.control_policy = j["control_policy"].get<std::string>();
    if (rc.control_policy != "equilibrium" && rc.control_policy != "zero") {
      config_fail("regime.control_policy", "expected equilibrium|zero");
    }
  }

  if (rc.kind != RegimeKind::FullConsensus && !net.leader_id) {
    config_fail("network.leader_id", "required for leader/follower regimes");
  }
  if (rc.kind == RegimeKind::Leader) {
    const std::size_t expected = static_cast<std::size_t>(net.n - 1);
    if (rc.x_tilde.empty() && !rc.x_star_hint.empty()) {
      if (rc.x_star_hint.size() != expected) {
        config_fail("regime.x_star", "expected one entry per non-leader agent");
      }
      for (double v : rc.x_star_hint) rc.x_tilde.push_back(0.9 * v);
    }
    if (rc.x_tilde.size() != expected) {
      config_fail("regime.x_tilde",
                  "expected one assigned opinion per non-leader agent "
                  "(or provide regime.x_star to default to 0.9*x_star)");
    }
    if (!rc.x_star_hint.empty() && rc.x_star_hint.size() == expected) {
      for (std::size_t i = 0; i < expected; ++i) {
        if (!(rc.x_tilde[i] < rc.x_star_hint[i])) {
          std::ostringstream at;
          at << "regime.x_tilde[" << i << "]";
          config_fail(at.str(), "must be strictly below the agent's optimum");
        }
      }
    }
  }
  if (rc.kind == RegimeKind::Follower && !rc.x_bar1) {
    config_fail("regime.x_bar1", "required for standalone follower runs");
  }
  return rc;
}

MultiplierModel parse_poly(const json& j, const std::string& path) {
  MultiplierModel m;
  m.coeffs = as_number_list(j, path);
  if (m.coeffs.empty()) config_fail(path, "needs at least one coefficient");
  if (m.coeffs.size() > 5) config_fail(path, "polynomial degree above 4");
  return m;
}

// The solver divides by lambda(s): the trajectory must stay away from zero
// over the whole horizon, not just at the points a run happens to visit.
void check_multiplier_on_horizon(const MultiplierModel& m, double t,
                                 const std::string& path) {
  for (int i = 0; i <= 64; ++i) {
    const double s = t * i / 64;
    try {
      multiplier_eval(m, s);
    } catch (const Error&) {
      std::ostringstream why;
      why << "lambda(s) vanishes near s=" << s << " on [0," << t << "]";
      config_fail(path, why.str());
    }
  }
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& err) {
    fail(ErrorKind::Config, std::string("config parse error: ") + err.what());
  }

  ScenarioConfig cfg;
  cfg.network = parse_network(require_field(j, "config", "network"));

  cfg.initial_opinions =
      as_number_list(require_field(j, "config", "initial_opinions"),
                     "initial_opinions");
  if (static_cast<int>(cfg.initial_opinions.size()) != cfg.network.n) {
    config_fail("initial_opinions", "expected one entry per agent");
  }
  for (std::size_t i = 0; i < cfg.initial_opinions.size(); ++i) {
    const double v = cfg.initial_opinions[i];
    if (v < 0.0 || v > 1.0) {
      std::ostringstream at;
      at << "initial_opinions[" << i << "]";
      config_fail(at.str(), "opinion outside [0,1]");
    }
  }

  cfg.regime = parse_regime(require_field(j, "config", "regime"), cfg.network);

  if (j.contains("h_params")) {
    const json& hj = j["h_params"];
    cfg.h_params.b = as_number(require_field(hj, "h_params", "b"), "h_params.b");
    cfg.h_params.d = as_number(require_field(hj, "h_params", "d"), "h_params.d");
  }
  if (!(cfg.h_params.b > 0.0)) config_fail("h_params.b", "must be > 0");
  if (!(cfg.h_params.d > 0.0)) config_fail("h_params.d", "must be > 0");

  cfg.multipliers.assign(cfg.network.n, MultiplierModel{});
  if (j.contains("multiplier")) {
    const json& mj = j["multiplier"];
    if (mj.contains("default")) {
      const MultiplierModel def = parse_poly(mj["default"], "multiplier.default");
      cfg.multipliers.assign(cfg.network.n, def);
    }
    if (mj.contains("per_agent")) {
      const json& pa = mj["per_agent"];
      if (!pa.is_object()) {
        config_fail("multiplier.per_agent", "expected agent-id keyed object");
      }
      for (auto it = pa.begin(); it != pa.end(); ++it) {
        int id = 0;
        try {
          id = std::stoi(it.key());
        } catch (...) {
          config_fail("multiplier.per_agent", "keys must be agent ids");
        }
        if (id < 1 || id > cfg.network.n) {
          config_fail("multiplier.per_agent." + it.key(), "agent id outside 1..n");
        }
        cfg.multipliers[id - 1] =
            parse_poly(it.value(), "multiplier.per_agent." + it.key());
      }
    }
  }

  {
    const json& gj = require_field(j, "config", "grid");
    const double t = as_number(require_field(gj, "grid", "t"), "grid.t");
    const int steps =
        gj.contains("steps") ? as_int(gj["steps"], "grid.steps") : 10000;
    if (!(t > 0.0)) config_fail("grid.t", "must be > 0");
    if (steps < 1) config_fail("grid.steps", "must be >= 1");
    cfg.grid = TimeGrid(t, steps);
  }

  if (j.contains("monte_carlo")) {
    const json& mc = j["monte_carlo"];
    if (mc.contains("replicas")) {
      cfg.monte_carlo.replicas = as_int(mc["replicas"], "monte_carlo.replicas");
    }
    if (mc.contains("seed")) {
      if (!mc["seed"].is_number_integer() && !mc["seed"].is_number_unsigned()) {
        config_fail("monte_carlo.seed", "expected an integer");
      }
      cfg.monte_carlo.seed = mc["seed"].get<uint64_t>();
    }
    if (mc.contains("replica_offset")) {
      cfg.monte_carlo.replica_offset =
          as_int(mc["replica_offset"], "monte_carlo.replica_offset");
    }
  }
  if (cfg.monte_carlo.replicas < 1) {
    config_fail("monte_carlo.replicas", "must be >= 1");
  }
  if (cfg.monte_carlo.replica_offset < 0) {
    config_fail("monte_carlo.replica_offset", "must be >= 0");
  }

  if (j.contains("solver")) {
    const json& sj = j["solver"];
    if (sj.contains("tol")) cfg.solver.tol = as_number(sj["tol"], "solver.tol");
    if (sj.contains("max_iter")) {
      cfg.solver.max_iter = as_int(sj["max_iter"], "solver.max_iter");
    }
    if (sj.contains("follower_drift_sign")) {
      if (!sj["follower_drift_sign"].is_string()) {
        config_fail("solver.follower_drift_sign", "expected a string");
      }
      const std::string sign = sj["follower_drift_sign"].get<std::string>();
      if (sign == "statement") {
        cfg.solver.follower_drift_sign = FollowerDriftSign::Statement;
      } else if (sign == "proof") {
        cfg.solver.follower_drift_sign = FollowerDriftSign::Proof;
      } else {
        config_fail("solver.follower_drift_sign", "expected statement|proof");
      }
    }
    if (sj.contains("solve_time")) {
      cfg.solver.solve_time = as_number(sj["solve_time"], "solver.solve_time");
    }
  }
  if (!(cfg.solver.tol > 0.0)) config_fail("solver.tol", "must be > 0");
  if (cfg.solver.max_iter < 1) config_fail("solver.max_iter", "must be >= 1");
  if (cfg.solver.solve_time &&
      !(*cfg.solver.solve_time > 0.0 && *cfg.solver.solve_time <= cfg.grid.t)) {
    config_fail("solver.solve_time", "must lie in (0, t]");
  }

  for (std::size_t i = 0; i < cfg.multipliers.size(); ++i) {
    std::ostringstream at;
    at << "multiplier.per_agent." << i + 1;
    check_multiplier_on_horizon(cfg.multipliers[i], cfg.grid.t, at.str());
  }

  if (j.contains("outputs")) {
    const json& oj = j["outputs"];
    if (oj.contains("directory")) {
      if (!oj["directory"].is_string()) {
        config_fail("outputs.directory", "expected a string");
      }
      cfg.outputs.directory = oj["directory"].get<std::string>();
    }
    if (oj.contains("formats")) {
      if (!oj["formats"].is_array()) {
        config_fail("outputs.formats", "expected an array");
      }
      cfg.outputs.formats.clear();
      for (const auto& f : oj["formats"]) {
        if (!f.is_string()) config_fail("outputs.formats", "expected strings");
        const std::string fmt = f.get<std::string>();
        if (fmt != "csv") config_fail("outputs.formats", "only csv is known");
        cfg.outputs.formats.push_back(fmt);
      }
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json j;
  json net;
  net["n"] = cfg.network.n;
  net["edges"] = json::array();
  for (const Edge& e : cfg.network.edges) {
    net["edges"].push_back({{"i", e.i}, {"j", e.j}, {"w", e.weight}});
  }
  net["stubbornness"] = cfg.network.stubbornness;
  if (cfg.network.leader_id) net["leader_id"] = *cfg.network.leader_id;
  j["network"] = net;

  j["initial_opinions"] = cfg.initial_opinions;

  json rj;
  switch (cfg.regime.kind) {
    case RegimeKind::FullConsensus: rj["type"] = "full_consensus"; break;
    case RegimeKind::Leader: rj["type"] = "leader"; break;
    case RegimeKind::Follower: rj["type"] = "follower"; break;
  }
  rj["sigma"] = cfg.regime.sigma;
  rj["sigma1"] = cfg.regime.sigma1;
  rj["w_bar"] = cfg.regime.w_bar;
  if (!cfg.regime.x_tilde.empty()) rj["x_tilde"] = cfg.regime.x_tilde;
  if (!cfg.regime.x_star_hint.empty()) rj["x_star"] = cfg.regime.x_star_hint;
  if (cfg.regime.x_bar1) rj["x_bar1"] = *cfg.regime.x_bar1;
  rj["control_policy"] = cfg.regime.control_policy;
  j["regime"] = rj;

  j["h_params"] = {{"b", cfg.h_params.b}, {"d", cfg.h_params.d}};

  json mj;
  mj["per_agent"] = json::object();
  for (std::size_t i = 0; i < cfg.multipliers.size(); ++i) {
    mj["per_agent"][std::to_string(i + 1)] = cfg.multipliers[i].coeffs;
  }
  j["multiplier"] = mj;

  j["grid"] = {{"t", cfg.grid.t}, {"steps", cfg.grid.steps}};
  j["monte_carlo"] = {{"replicas", cfg.monte_carlo.replicas},
                      {"seed", cfg.monte_carlo.seed},
                      {"replica_offset", cfg.monte_carlo.replica_offset}};
  json sj = {{"tol", cfg.solver.tol},
             {"max_iter", cfg.solver.max_iter},
             {"follower_drift_sign",
              cfg.solver.follower_drift_sign == FollowerDriftSign::Statement
                  ? "statement"
                  : "proof"}};
  if (cfg.solver.solve_time) sj["solve_time"] = *cfg.solver.solve_time;
  j["solver"] = sj;
  j["outputs"] = {{"directory", cfg.outputs.directory},
                  {"formats", cfg.outputs.formats}};
  return j.dump(2) + "\n";
}

uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string text = serialize_scenario(cfg);
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace opg
