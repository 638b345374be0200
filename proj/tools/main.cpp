#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "opiniongames/harness.hpp"
#include "opiniongames/io.hpp"
#include "opiniongames/spectral.hpp"
#include "opiniongames/version.hpp"

namespace {

std::string resolve_out_dir(const std::string& flag_value,
                            const opg::ScenarioConfig& cfg) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("OPINIONGAMES_OUTPUT_DIR")) {
    if (*env) return env;
  }
  return cfg.outputs.directory;
}

void print_equilibrium(const opg::EquilibriumSolve& eq) {
  std::cout << "agent  x_star                phi_star\n";
  for (std::size_t i = 0; i < eq.x_star.size(); ++i) {
    std::printf("%-6d %-21.12g %-21.12g\n", eq.agent_ids[i], eq.x_star[i],
                eq.phi_star[i]);
  }
  if (eq.mean_field_iterations > 0) {
    std::cout << "mean-field iterations: " << eq.mean_field_iterations << "\n";
  }
}

int run_solve(const std::string& config_path, const std::string& out_flag) {
  const opg::ScenarioConfig cfg = opg::load_scenario(config_path);
  const opg::EquilibriumSolve eq = opg::solve_equilibrium(cfg);
  print_equilibrium(eq);

  const std::string out_dir = resolve_out_dir(out_flag, cfg);
  std::filesystem::create_directories(out_dir);
  std::ofstream file(std::filesystem::path(out_dir) / "equilibrium.csv",
                     std::ios::binary);
  file << "agent,x_star,phi_star\n";
  for (std::size_t i = 0; i < eq.x_star.size(); ++i) {
    file << eq.agent_ids[i] << "," << opg::format_double(eq.x_star[i]) << ","
         << opg::format_double(eq.phi_star[i]) << "\n";
  }
  std::ofstream effective(
      std::filesystem::path(out_dir) / "effective_config.json",
      std::ios::binary);
  effective << opg::serialize_scenario(cfg);
  std::cout << "wrote " << out_dir << "/equilibrium.csv\n";
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_flag) {
  const opg::ScenarioConfig cfg = opg::load_scenario(config_path);
  const opg::EnsembleSummary summary = opg::run_scenario(cfg);
  const std::string out_dir = resolve_out_dir(out_flag, cfg);
  const auto written = opg::export_results(summary, cfg, out_dir);
  std::cout << "replicas: " << summary.replicas() << "\n"
            << "gap-bound pairs: " << summary.gap_pairs()
            << ", pass rate: " << summary.gap_pass_rate() << "\n";
  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

int run_verify(const std::string& config_path) {
  const opg::ScenarioConfig cfg = opg::load_scenario(config_path);
  int failures = 0;
  auto check = [&failures](bool ok, const std::string& name) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  check(opg::validate_network(cfg.network).ok(), "network spec well-formed");

  const int grid_points = 10000;
  if (cfg.regime.kind == opg::RegimeKind::FullConsensus) {
    opg::CoefficientParams cp;
    cp.k = cfg.network.stubbornness.front();
    cp.w = cfg.network.edges.front().weight;
    cp.n = cfg.network.n;
    cp.t = cfg.grid.t;
    check(std::abs(opg::gamma(0.0, cp) - 1.0) <= 1e-14, "gamma(0) = 1");
    bool monotone = true;
    double prev = opg::gamma(0.0, cp);
    for (int i = 1; i <= grid_points; ++i) {
      const double cur = opg::gamma(cp.t * i / grid_points, cp);
      if (cur > prev + 1e-15) monotone = false;
      prev = cur;
    }
    check(monotone, "gamma nonincreasing on [0,t]");
  } else {
    const int leader_id = cfg.network.leader_id.value_or(1);
    if (cfg.regime.kind == opg::RegimeKind::Leader) {
      opg::CoefficientParams cp;
      cp.k_1 = cfg.network.stubbornness[leader_id - 1];
      cp.w_bar = cfg.regime.w_bar;
      cp.n = cfg.network.n;
      cp.t = cfg.grid.t;
      check(std::abs(opg::gamma_hat(0.0, cp) - 1.0) <= 1e-14,
            "gamma_hat(0) = 1");
    }
    bool xi_exact = true;
    for (int id = 1; id <= cfg.network.n; ++id) {
      if (id == leader_id) continue;
      opg::CoefficientParams cp;
      cp.k = cfg.network.stubbornness[id - 1];
      for (const opg::Edge& e : cfg.network.edges) {
        if (e.i == id && e.j == leader_id) cp.w_i1 = e.weight;
      }
      cp.n = cfg.network.n;
      cp.t = cfg.grid.t;
      if (!(cp.lambda_tilde() > 0.0)) continue;
      if (opg::xi_hat(0.0, cp) != cp.w_i1 / cp.lambda_tilde()) xi_exact = false;
    }
    check(xi_exact, "xi_hat(0) = w_i1/lambda_tilde exactly");
  }

  opg::ScenarioConfig reduced = cfg;
  reduced.monte_carlo.replicas = std::min(cfg.monte_carlo.replicas, 8);
  const opg::EnsembleSummary a = opg::run_scenario(reduced);
  check(a.gap_pass_rate() == 1.0, "opinion-gap bound holds on the ensemble");

  const opg::EnsembleSummary b = opg::run_scenario(reduced);
  check(opg::results_digest(a, reduced) == opg::results_digest(b, reduced),
        "re-run produces byte-identical exports");

  std::cout << (failures == 0 ? "all checks passed\n" : "checks FAILED\n");
  return failures == 0 ? 0 : 1;
}

int run_pde(const std::string& demo, const std::string& out_flag) {
  const std::string out_dir = out_flag.empty() ? "out_pde" : out_flag;
  std::filesystem::create_directories(out_dir);
  auto snapshot = [&](const opg::WaveField& f, const std::string& tag) {
    const std::string path =
        out_dir + "/field_" + tag + ".csv";
    opg::export_field(f, path);
    std::cout << "wrote " << path << "\n";
  };

  if (demo == "heat" || demo == "all") {
    opg::SpatialGrid grid{-12.0, 13.0, 2048};
    const auto I = opg::WaveField::gaussian(grid, 0.5, 0.5);
    const auto coeffs = opg::PDECoefficients::constant(0.0, 0.0, 1.0, grid);
    snapshot(I, "heat_s0");
    std::cout << "heat kernel variance law (expected sigma0^2 + 2 s):\n";
    for (double s : {0.25, 0.5, 1.0}) {
      const auto psi = opg::solve_diffusion_fourier(coeffs, I, s);
      char tag[32];
      std::snprintf(tag, sizeof(tag), "heat_s%g", s);
      snapshot(psi, tag);
      const auto m = opg::field_moments(psi);
      std::printf("  s=%-5g measured=%-12.8g expected=%-12.8g\n", s, m.variance,
                  0.25 + 2.0 * s);
    }
  }
  if (demo == "transport" || demo == "all") {
    opg::SpatialGrid grid{-12.0, 13.0, 2048};
    const auto I = opg::WaveField::gaussian(grid, 0.5, 0.5);
    const auto coeffs = opg::PDECoefficients::constant(0.0, 1.0, 0.0, grid);
    for (double s : {0.5, 1.0}) {
      const auto psi = opg::solve_diffusion_fourier(coeffs, I, s);
      char tag[32];
      std::snprintf(tag, sizeof(tag), "transport_s%g", s);
      snapshot(psi, tag);
      const auto m = opg::field_moments(psi);
      std::printf("  s=%-5g field center=%-12.8g (starts at 0.5, drifts by -s)\n",
                  s, m.mean);
    }
  }
  if (demo == "transition" || demo == "all") {
    // State-dependent right-hand side from the equilibrium machinery,
    // evolved pointwise.
    opg::SpatialGrid grid{-4.0, 5.0, 1024};
    const auto I = opg::WaveField::gaussian(grid, 0.5, 0.35);
    opg::CoefficientParams cp;
    cp.k = 1.0;
    cp.w = 0.5;
    cp.n = 3;
    cp.t = 1.0;
    opg::HParams hp{0.5, 0.1};
    opg::GameRegime regime = opg::FullConsensusRegime{0.1};
    std::vector<double> v(grid.n_x, 0.0);
    for (int j = 0; j < grid.n_x; ++j) {
      opg::GameState st;
      st.s = 0.5;
      st.x_i = grid.x(j);
      st.x_j = 0.6;
      st.x0_i = 0.5;
      st.mean_opt = 0.5;
      st.u_i = 0.2;
      st.lambda = opg::multiplier_eval(opg::MultiplierModel{}, st.s);
      v[j] = opg::wick_rhs(opg::f_derivatives(regime, st, hp, cp));
    }
    snapshot(I, "transition_s0");
    for (double s : {0.1, 0.2}) {
      const auto psi = opg::transition_wave(I, v, s);
      char tag[32];
      std::snprintf(tag, sizeof(tag), "transition_s%g", s);
      snapshot(psi, tag);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback-Nash opinion dynamics engine"};
  app.set_version_flag("--version", opg::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string demo = "all";

  auto* solve = app.add_subcommand("solve", "equilibrium profile only");
  solve->add_option("-c,--config", config_path, "scenario config file")
      ->required();
  solve->add_option("-o,--out", out_dir, "output directory override");

  auto* simulate = app.add_subcommand("simulate", "full Monte Carlo ensemble");
  simulate->add_option("-c,--config", config_path, "scenario config file")
      ->required();
  simulate->add_option("-o,--out", out_dir, "output directory override");

  auto* verify = app.add_subcommand("verify", "invariant and bound suite");
  verify->add_option("-c,--config", config_path, "scenario config file")
      ->required();

  auto* pde = app.add_subcommand("pde", "transition-function demos");
  pde->add_option("--demo", demo, "heat|transport|transition|all");
  pde->add_option("-o,--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(config_path, out_dir);
    if (simulate->parsed()) return run_simulate(config_path, out_dir);
    if (verify->parsed()) return run_verify(config_path);
    if (pde->parsed()) return run_pde(demo, out_dir);
  } catch (const opg::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "unexpected error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
