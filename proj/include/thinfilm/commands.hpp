#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "thinfilm/analysis.hpp"
#include "thinfilm/run_io.hpp"
#include "thinfilm/scenario.hpp"

namespace thinfilm {

enum ExitCode : int { exit_ok = 0, exit_check_failure = 1, exit_solver_failure = 2, exit_usage = 3 };

/// Names accepted by cmd_verify, in report order.
const std::vector<std::string> &known_checks();

/// Space-time test function for the weak-form check: g = A (x_1 + |x|^2 / 2)
/// cut off between the configured radii, theta centered at T/2 with support
/// strictly inside (tau, T - tau).
TestFunctionSpec weak_form_test_function(const Scenario &sc);

/// Runs one named check on a loaded run. Throws ConfigError for unknown names
/// and DomainError when the check needs densities the run did not store.
CheckReport run_check(const std::string &name, const LoadedRun &run);

/// Executes the scenario and writes the run directory. 0 ok, 2 solver failure, 3 config error.
int cmd_run(const std::filesystem::path &scenario, const std::filesystem::path &out_dir, std::ostream &log);

/// Writes checks/<name>.json per check; an empty list means the scenario's own list.
/// 0 iff all pass, 1 on a failed check, 3 on an unknown name or unreadable run.
int cmd_verify(const std::filesystem::path &run_dir, const std::vector<std::string> &checks, std::ostream &log);

/// Tau sweep: refinement.csv and refinement.json under out_dir.
/// S sweep (non-empty s_list): one run directory per s, each verified, plus sweep.csv.
int cmd_sweep(const std::filesystem::path &scenario, const std::vector<double> &tau_list,
              const std::vector<double> &s_list, const std::filesystem::path &out_dir, std::ostream &log);

int cmd_print_config(const std::filesystem::path &scenario, std::ostream &out, std::ostream &log);

/// Default tau ladder of the refinement sweep.
const std::vector<double> &default_tau_list();

} // namespace thinfilm
