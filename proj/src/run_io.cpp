#include "thinfilm/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thinfilm/error.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string code_version() { return THINFILM_VERSION; }

std::string snapshot_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u_%06d.txt", k);
  return buf;
}

namespace {

constexpr const char *kCsvHeader = "k,t,energy,entropy,second_moment,w2_sq_step,inner_iters,kkt_residual,boundary_mass";

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path &file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  return out;
}

std::string read_text(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("missing file: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double parse_field(const std::string &s, const fs::path &file, int line) {
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError(file.string() + ": bad number on line " + std::to_string(line));
  return v;
}

} // namespace

void write_density(const fs::path &file, const GridDensity &u) {
  const auto &g = u.grid();
  auto out = open_out(file);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Point x = g.node(i);
    for (int a = 0; a < g.dim(); ++a) out << g17(x[a]) << ' ';
    out << g17(u[i]) << '\n';
  }
}

void write_diagnostics_csv(const fs::path &file, const Trajectory &traj) {
  auto out = open_out(file);
  out << kCsvHeader << '\n';
  for (const auto &st : traj.steps) {
    out << st.index << ',' << g17(traj.config.tau * st.index) << ',' << g17(st.energy) << ',' << g17(st.entropy)
        << ',' << g17(st.second_moment) << ',' << g17(st.w2_to_prev) << ',' << st.inner_iterations << ','
        << g17(st.kkt_residual) << ',' << g17(boundary_mass(st.density)) << '\n';
  }
}

void write_run(const fs::path &dir, const Scenario &sc, const Trajectory &traj) {
  fs::create_directories(dir / "snapshots");
  write_diagnostics_csv(dir / "diagnostics.csv", traj);

  std::vector<int> snaps{0};
  const int n = static_cast<int>(traj.steps.size());
  for (int k = 1; k <= n; ++k)
    if (k % sc.snapshot_stride == 0 || k == n) snaps.push_back(k);
  for (int k : snaps) write_density(dir / "snapshots" / snapshot_name(k), traj.density(static_cast<std::size_t>(k)));

  json m;
  m["code_version"] = code_version();
  m["scenario"] = echo_scenario(sc);
  m["status"] = traj.status == RunStatus::completed ? "completed" : "failed";
  m["failure"] = traj.failure;
  m["steps_completed"] = n;
  m["snapshots"] = snaps;
  m["initial"] = {{"energy", energy(traj.initial, sc.s)},
                  {"entropy", entropy(traj.initial)},
                  {"second_moment", second_moment(traj.initial)},
                  {"boundary_mass", boundary_mass(traj.initial)}};
  auto out = open_out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

LoadedRun load_run(const fs::path &dir) {
  json m;
  try {
    m = json::parse(read_text(dir / "manifest.json"));
  } catch (const json::exception &e) {
    throw ConfigError((dir / "manifest.json").string() + ": " + e.what());
  }
  Scenario sc = parse_scenario(m.at("scenario").get<std::string>());
  const PeriodicGrid g = sc.grid();
  const JkoConfig cfg = sc.jko_config();

  const fs::path csv = dir / "diagnostics.csv";
  std::istringstream is(read_text(csv));
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw ConfigError(csv.string() + ": unexpected header");

  GridDensity initial = read_density_file(dir / "snapshots" / snapshot_name(0), g);
  Trajectory traj{cfg, initial, {}, RunStatus::completed, {}, {}};
  if (m.value("status", "completed") != "completed") {
    traj.status = RunStatus::failed;
    traj.failure = m.value("failure", "");
  }
  int lineno = 1;
  const GridDensity *latest = &traj.initial;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() != 9) throw ConfigError(csv.string() + ": expected 9 columns on line " + std::to_string(lineno));
    const int k = static_cast<int>(parse_field(cols[0], csv, lineno));
    if (k != static_cast<int>(traj.steps.size()) + 1)
      throw ConfigError(csv.string() + ": steps must be contiguous from 1 (line " + std::to_string(lineno) + ")");
    const fs::path snap = dir / "snapshots" / snapshot_name(k);
    const bool have = fs::exists(snap);
    GridDensity u = have ? read_density_file(snap, g) : *latest;
    const double e = parse_field(cols[2], csv, lineno);
    const double w = parse_field(cols[5], csv, lineno);
    traj.steps.push_back(StepRecord{k, std::move(u), w, e, parse_field(cols[3], csv, lineno),
                                    parse_field(cols[4], csv, lineno),
                                    static_cast<int>(parse_field(cols[6], csv, lineno)),
                                    parse_field(cols[7], csv, lineno), e + w / (2.0 * cfg.tau)});
    traj.has_density.push_back(have);
    latest = &traj.steps.back().density;
  }
  return {std::move(sc), std::move(traj)};
}

} // namespace thinfilm
