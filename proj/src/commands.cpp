#include "thinfilm/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "thinfilm/error.hpp"

namespace thinfilm {

namespace fs = std::filesystem;

const std::vector<std::string> &known_checks() {
  static const std::vector<std::string> names{"energy_estimate", "moment_bound",  "entropy_dissipation",
                                              "weak_form_step",  "evi_entropy",   "derivative_identity"};
  return names;
}

const std::vector<double> &default_tau_list() {
  static const std::vector<double> taus{4e-3, 2e-3, 1e-3, 5e-4};
  return taus;
}

TestFunctionSpec weak_form_test_function(const Scenario &sc) {
  const double horizon = sc.tau * sc.num_steps;
  const double outer = 0.5 * horizon - 1.5 * sc.tau;
  if (!(outer > 0.0)) throw ConfigError("weak_form_step: needs at least 4 steps");
  const double inner = std::min(0.2 * horizon, 0.5 * outer);
  Point linear{};
  linear[0] = 1.0;
  CutoffQuadratic g(sc.dimension, sc.weak_form.amplitude, 0.0, linear, 0.5, Point{},
                    SmoothCutoff(sc.weak_form.inner_radius, sc.weak_form.outer_radius));
  return TestFunctionSpec(g, 0.5 * horizon, SmoothCutoff(inner, outer));
}

CheckReport run_check(const std::string &name, const LoadedRun &run) {
  const Scenario &sc = run.scenario;
  const Trajectory &traj = run.trajectory;
  if (name == "energy_estimate") return check_energy_estimate(traj);
  if (name == "moment_bound") return check_moment_bound(traj);
  if (name == "entropy_dissipation") return check_entropy_dissipation(traj);
  if (name == "weak_form_step") return check_weak_form_step(traj, weak_form_test_function(sc));
  if (name == "evi_entropy") {
    const GridDensity v = gaussian_density(sc.grid(), sc.evi.center, sc.evi.variance);
    return check_evi_entropy(traj.initial, v, sc.evi.times, traj.config.transport);
  }
  if (name == "derivative_identity") {
    Point dir{}, center{};
    dir[0] = 1.0;
    center[0] = 0.3;
    const auto eta = plateau_field(sc.dimension, dir, SmoothCutoff(1.0, 4.0), center);
    return derivative_identity_check(traj.density(traj.steps.size()), eta, sc.s);
  }
  throw ConfigError("unknown check: " + name);
}

namespace {

void write_text(const fs::path &file, const std::string &text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << text;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs a parsed scenario into dir; returns the exit code.
int execute(const Scenario &sc, const fs::path &dir, std::ostream &log) {
  GridDensity u0 = initial_density(sc);
  const JkoConfig cfg = sc.jko_config();
  cfg.validate();
  const Trajectory traj = run(u0, cfg, sc.num_steps);
  write_run(dir, sc, traj);
  if (traj.status != RunStatus::completed) {
    log << "solver failure: " << traj.failure << '\n';
    return exit_solver_failure;
  }
  return exit_ok;
}

int verify_loaded(const LoadedRun &lr, const fs::path &dir, const std::vector<std::string> &checks,
                  std::ostream &log) {
  fs::create_directories(dir / "checks");
  bool all = true;
  for (const auto &name : checks) {
    const CheckReport r = run_check(name, lr);
    write_text(dir / "checks" / (name + ".json"), to_json(r) + "\n");
    log << (r.passed ? "PASS " : "FAIL ") << name << " max_violation=" << r.max_violation
        << " tolerance=" << r.tolerance << '\n';
    all = all && r.passed;
  }
  return all ? exit_ok : exit_check_failure;
}

} // namespace

int cmd_run(const fs::path &scenario, const fs::path &out_dir, std::ostream &log) {
  try {
    return execute(load_scenario(scenario), out_dir, log);
  } catch (const ConfigError &e) {
    log << "config error: " << e.what() << '\n';
  } catch (const DomainError &e) {
    log << "config error: " << e.what() << '\n';
  } catch (const DimensionError &e) {
    log << "config error: " << e.what() << '\n';
  } catch (const fs::filesystem_error &e) {
    log << "cannot write output: " << e.what() << '\n';
  }
  return exit_usage;
}

int cmd_verify(const fs::path &run_dir, const std::vector<std::string> &checks, std::ostream &log) {
  try {
    const LoadedRun lr = load_run(run_dir);
    const std::vector<std::string> names = checks.empty() ? lr.scenario.checks : checks;
    for (const auto &n : names)
      if (std::find(known_checks().begin(), known_checks().end(), n) == known_checks().end()) {
        log << "unknown check: " << n << '\n';
        return exit_usage;
      }
    return verify_loaded(lr, run_dir, names, log);
  } catch (const ConfigError &e) {
    log << "config error: " << e.what() << '\n';
  } catch (const DomainError &e) {
    log << "cannot verify: " << e.what() << '\n';
  } catch (const DimensionError &e) {
    log << "cannot verify: " << e.what() << '\n';
  } catch (const fs::filesystem_error &e) {
    log << "cannot write output: " << e.what() << '\n';
  }
  return exit_usage;
}

int cmd_sweep(const fs::path &scenario, const std::vector<double> &tau_list, const std::vector<double> &s_list,
              const fs::path &out_dir, std::ostream &log) {
  try {
    const Scenario sc = load_scenario(scenario);
    fs::create_directories(out_dir);

    if (!s_list.empty()) {
      std::vector<int> codes(s_list.size(), exit_ok);
      std::vector<std::string> logs(s_list.size());
      std::vector<std::string> dirs(s_list.size());
      for (std::size_t i = 0; i < s_list.size(); ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "s_%g", s_list[i]);
        dirs[i] = buf;
      }
      const int count = static_cast<int>(s_list.size());
      // Each worker owns one run directory.
#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        std::ostringstream wlog;
        try {
          Scenario one = sc;
          one.s = s_list[idx];
          one.name = sc.name + "_" + dirs[idx];
          const fs::path dir = out_dir / dirs[idx];
          int code = execute(one, dir, wlog);
          if (code == exit_ok) code = verify_loaded(load_run(dir), dir, one.checks, wlog);
          codes[idx] = code;
        } catch (const std::exception &e) {
          wlog << "error: " << e.what() << '\n';
          codes[idx] = exit_usage;
        }
        logs[idx] = wlog.str();
      }
      std::ostringstream csv;
      csv << "s,run_dir,exit_code\n";
      int worst = exit_ok;
      for (std::size_t i = 0; i < s_list.size(); ++i) {
        log << "[" << dirs[i] << "]\n" << logs[i];
        csv << g17(s_list[i]) << ',' << dirs[i] << ',' << codes[i] << '\n';
        worst = std::max(worst, codes[i]);
      }
      write_text(out_dir / "sweep.csv", csv.str());
      return worst;
    }

    std::vector<double> taus = tau_list.empty() ? default_tau_list() : tau_list;
    std::sort(taus.begin(), taus.end(), std::greater<>());
    const double horizon = sc.tau * sc.num_steps;
    const RefinementReport rep =
        tau_refinement_study(initial_density(sc), sc.jko_config(), taus, horizon, {std::min(0.5, 0.5 * sc.s)});
    std::ostringstream csv;
    csv << "tau_coarse,tau_fine,r,l2_gap,sup_gap,ratio\n";
    for (const auto &row : rep.rows)
      csv << g17(row.tau_coarse) << ',' << g17(row.tau_fine) << ',' << g17(row.r) << ',' << g17(row.l2_gap) << ','
          << g17(row.sup_gap) << ',' << g17(row.ratio) << '\n';
    write_text(out_dir / "refinement.csv", csv.str());
    write_text(out_dir / "refinement.json", to_json(rep) + "\n");
    if (!rep.failure.empty()) {
      log << "solver failure: " << rep.failure << '\n';
      return exit_solver_failure;
    }
    log << (rep.passed ? "PASS" : "FAIL") << " refinement over " << taus.size() << " taus\n";
    return rep.passed ? exit_ok : exit_check_failure;
  } catch (const ConfigError &e) {
    log << "config error: " << e.what() << '\n';
  } catch (const DomainError &e) {
    log << "config error: " << e.what() << '\n';
  } catch (const DimensionError &e) {
    log << "config error: " << e.what() << '\n';
  } catch (const fs::filesystem_error &e) {
    log << "cannot write output: " << e.what() << '\n';
  }
  return exit_usage;
}

int cmd_print_config(const fs::path &scenario, std::ostream &out, std::ostream &log) {
  try {
    out << echo_scenario(load_scenario(scenario));
    return exit_ok;
  } catch (const std::exception &e) {
    log << "config error: " << e.what() << '\n';
    return exit_usage;
  }
}

} // namespace thinfilm
