#include "opiniongames/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "opiniongames/version.hpp"

namespace opg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

namespace {

std::string hex64(uint64_t v) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(v));
  return buffer;
}

struct NamedFile {
  std::string name;
  std::string content;
};

std::vector<NamedFile> render_results(const EnsembleSummary& summary,
                                      const ScenarioConfig& cfg) {
  std::vector<NamedFile> files;

  files.push_back({"effective_config.json", serialize_scenario(cfg)});

  {
    json manifest;
    manifest["generator"] = "opiniongames";
    manifest["version"] = kVersion;
    manifest["config_hash"] = hex64(config_hash(cfg));
    manifest["seed"] = cfg.monte_carlo.seed;
    manifest["replicas"] = summary.replicas();
    manifest["replica_offset"] = cfg.monte_carlo.replica_offset;
    manifest["agents"] = summary.agent_ids;
    manifest["gap_pass_rate"] = summary.gap_pass_rate();
    files.push_back({"manifest.json", manifest.dump(2) + "\n"});
  }

  {
    std::ostringstream out;
    out << "agent,x_star,phi_star\n";
    for (std::size_t pos = 0; pos < summary.x_star.size(); ++pos) {
      out << summary.agent_ids[pos] << "," << format_double(summary.x_star[pos])
          << "," << format_double(summary.phi_star[pos]) << "\n";
    }
    files.push_back({"equilibrium.csv", out.str()});
  }

  {
    const auto mean = summary.spread_mean();
    const auto lo = summary.spread_quantile(0.025);
    const auto hi = summary.spread_quantile(0.975);
    std::ostringstream out;
    out << "s,spread_mean,spread_q025,spread_q975\n";
    for (std::size_t k = 0; k < mean.size(); ++k) {
      out << format_double(summary.grid.s(static_cast<int>(k))) << ","
          << format_double(mean[k]) << "," << format_double(lo[k]) << ","
          << format_double(hi[k]) << "\n";
    }
    files.push_back({"spread.csv", out.str()});
  }

  {
    const auto mean = summary.opinion_mean();
    std::ostringstream out;
    out << "s,agent,x_mean\n";
    for (int k = 0; k <= summary.grid.steps; ++k) {
      for (int a = 0; a < summary.agents; ++a) {
        out << format_double(summary.grid.s(k)) << "," << summary.agent_ids[a]
            << "," << format_double(mean[a][k]) << "\n";
      }
    }
    files.push_back({"opinions_mean.csv", out.str()});
  }

  {
    const OpinionPath& path = summary.first_path;
    std::ostringstream out;
    out << "s,agent,x,u,dB\n";
    for (int k = 0; k <= summary.grid.steps; ++k) {
      for (int a = 0; a < path.agents(); ++a) {
        const double dB = k < summary.grid.steps ? path.increments[a][k] : 0.0;
        out << format_double(summary.grid.s(k)) << "," << summary.agent_ids[a]
            << "," << format_double(path.opinions[a][k]) << ","
            << format_double(path.controls[a][k]) << "," << format_double(dB)
            << "\n";
      }
    }
    files.push_back({"trajectory.csv", out.str()});
  }

  {
    std::ostringstream out;
    out << "key,value\n";
    out << "replicas," << summary.replicas() << "\n";
    out << "first_replica," << summary.first_replica << "\n";
    out << "gap_pairs," << summary.gap_pairs() << "\n";
    out << "gap_pass_rate," << format_double(summary.gap_pass_rate()) << "\n";
    const auto excursions = summary.excursion_totals();
    for (int a = 0; a < summary.agents; ++a) {
      out << "excursions_agent_" << summary.agent_ids[a] << ","
          << excursions[a] << "\n";
    }
    files.push_back({"summary.csv", out.str()});
  }
  return files;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

std::vector<std::string> export_results(const EnsembleSummary& summary,
                                        const ScenarioConfig& cfg,
                                        const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + out_dir);
  std::vector<std::string> written;
  for (const NamedFile& f : render_results(summary, cfg)) {
    const fs::path path = fs::path(out_dir) / f.name;
    write_file(path, f.content);
    written.push_back(path.string());
  }
  return written;
}

uint64_t results_digest(const EnsembleSummary& summary,
                        const ScenarioConfig& cfg) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (const NamedFile& f : render_results(summary, cfg)) {
    for (unsigned char ch : f.name) {
      hash = (hash ^ ch) * 0x100000001b3ULL;
    }
    for (unsigned char ch : f.content) {
      hash = (hash ^ ch) * 0x100000001b3ULL;
    }
  }
  return hash;
}

std::vector<TrajectoryRow> import_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::vector<TrajectoryRow> rows;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Io, "empty trajectory file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TrajectoryRow row;
    std::istringstream fields(line);
    std::string field;
    auto next = [&](const char* what) {
      if (!std::getline(fields, field, ',')) {
        fail(ErrorKind::Io, std::string("trajectory row missing ") + what);
      }
      return field;
    };
    row.s = std::stod(next("s"));
    row.agent = std::stoi(next("agent"));
    row.x = std::stod(next("x"));
    row.u = std::stod(next("u"));
    row.dB = std::stod(next("dB"));
    rows.push_back(row);
  }
  return rows;
}

void export_field(const WaveField& field, const std::string& path) {
  std::ostringstream out;
  out << "x,re,im\n";
  for (std::size_t j = 0; j < field.values.size(); ++j) {
    out << format_double(field.grid.x(static_cast<int>(j))) << ","
        << format_double(field.values[j].real()) << ","
        << format_double(field.values[j].imag()) << "\n";
  }
  write_file(fs::path(path), out.str());
}

}  // namespace opg
