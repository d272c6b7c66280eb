#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "thinfilm/commands.hpp"
#include "thinfilm/error.hpp"

using namespace thinfilm;

int main(int argc, char **argv) {
  CLI::App app{"Minimizing-movement solver for the fractional thin-film equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  int threads = 0;
  app.add_option("--threads", threads, "OpenMP worker threads (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);

  std::string scenario, out, checks, tau_list, s_list;

  auto *run = app.add_subcommand("run", "Execute a scenario and write its run directory");
  run->add_option("--scenario", scenario, "Scenario file")->required();
  run->add_option("--out", out, "Run directory")->required();

  auto *verify = app.add_subcommand("verify", "Run checks on a stored run directory");
  verify->add_option("--out", out, "Run directory")->required();
  verify->add_option("--checks", checks, "Comma-separated check names (default: the scenario's list)");

  auto *sweep = app.add_subcommand("sweep", "Tau refinement study or s sweep");
  sweep->add_option("--scenario", scenario, "Scenario file")->required();
  sweep->add_option("--out", out, "Output directory")->required();
  auto *tau_opt = sweep->add_option("--tau-list", tau_list, "Comma-separated time steps");
  sweep->add_option("--s-list", s_list, "Comma-separated orders s; one run directory each")->excludes(tau_opt);

  auto *print = app.add_subcommand("print-config", "Echo the fully resolved scenario");
  print->add_option("--scenario", scenario, "Scenario file")->required();

  for (auto *sub : {run, verify, sweep, print})
    sub->add_option("--threads", threads, "OpenMP worker threads")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*run) return cmd_run(scenario, out, std::cerr);
    if (*verify) return cmd_verify(out, parse_name_list(checks), std::cerr);
    if (*sweep) return cmd_sweep(scenario, parse_number_list(tau_list), parse_number_list(s_list), out, std::cerr);
    if (*print) return cmd_print_config(scenario, std::cout, std::cerr);
  } catch (const ConfigError &e) {
    std::cerr << "usage error: " << e.what() << '\n';
  }
  return exit_usage;
}
