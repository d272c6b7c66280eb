#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "thinfilm/density.hpp"
#include "thinfilm/jko.hpp"

namespace thinfilm {

enum class InitialKind { gaussian, gaussian_mixture, uniform, from_file };

struct InitialDatum {
  InitialKind kind = InitialKind::gaussian;
  Point center{};
  double variance = 1.0;
  std::vector<MixtureComponent> components;
  /// Absolute after parsing (relative paths resolve against the scenario file).
  std::string path;

  bool operator==(const InitialDatum &) const = default;
};

/// Parameters of the space-time test function used by the weak-form check.
struct WeakFormSettings {
  double amplitude = 1000.0;
  double inner_radius = 5.0;
  double outer_radius = 12.0;

  bool operator==(const WeakFormSettings &) const = default;
};

/// Comparison density for the entropy EVI check: Gaussian(center, variance).
struct EviSettings {
  Point center{};
  double variance = 1.21;
  std::vector<double> times{1e-2, 5e-3, 2.5e-3};

  bool operator==(const EviSettings &) const = default;
};

struct Scenario {
  std::string name = "unnamed";
  int dimension = 1;
  int grid_n = 256;
  double grid_L = 40.0;
  double s = 1.0;
  double tau = 1e-3;
  int num_steps = 50;
  InitialDatum initial;
  bool allow_exact = true;
  SinkhornOptions sinkhorn;
  InnerSolverOptions inner;
  bool stale_potential = false;
  std::vector<std::string> checks{"energy_estimate", "moment_bound", "entropy_dissipation", "weak_form_step"};
  int snapshot_stride = 1;
  WeakFormSettings weak_form;
  EviSettings evi;

  bool operator==(const Scenario &) const = default;

  PeriodicGrid grid() const { return PeriodicGrid(dimension, grid_n, grid_L); }
  JkoConfig jko_config() const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys, malformed
/// values and violated invariants raise ConfigError naming the key.
/// `base_dir` resolves relative initial.path values.
Scenario parse_scenario(const std::string &text, const std::filesystem::path &base_dir = {});
Scenario load_scenario(const std::filesystem::path &file);

/// Every key with its value, numbers at 17 significant digits; re-parses to an equal Scenario.
std::string echo_scenario(const Scenario &sc);

/// Builds the initial density; throws ConfigError if a referenced file is
/// missing or does not match the grid.
GridDensity initial_density(const Scenario &sc);

/// Whitespace-separated columns, coordinates first and the value last, one node per row.
GridDensity read_density_file(const std::filesystem::path &file, const PeriodicGrid &g);

std::vector<double> parse_number_list(const std::string &text);
std::vector<std::string> parse_name_list(const std::string &text);

} // namespace thinfilm
