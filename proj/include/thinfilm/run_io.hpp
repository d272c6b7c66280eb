#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "thinfilm/jko.hpp"
#include "thinfilm/scenario.hpp"

namespace thinfilm {

std::string code_version();

/// Layout of a run directory:
///   diagnostics.csv        one row per step k = 1..N
///   snapshots/u_<k>.txt    k = 0, every snapshot_stride steps, and the last step
///   manifest.json          scenario echo, code version, status, initial diagnostics
/// All numbers are written with 17 significant digits.
void write_run(const std::filesystem::path &dir, const Scenario &sc, const Trajectory &traj);

void write_diagnostics_csv(const std::filesystem::path &file, const Trajectory &traj);
void write_density(const std::filesystem::path &file, const GridDensity &u);

struct LoadedRun {
  Scenario scenario;
  Trajectory trajectory;
};

/// Rebuilds the trajectory from disk. Steps without a snapshot get
/// has_density[k-1] = false. Throws ConfigError on missing or malformed files.
LoadedRun load_run(const std::filesystem::path &dir);

std::string snapshot_name(int k);

} // namespace thinfilm
