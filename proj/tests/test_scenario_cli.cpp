#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "thinfilm/commands.hpp"
#include "thinfilm/error.hpp"
#include "thinfilm/spectral.hpp"

using namespace thinfilm;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = THINFILM_SCENARIO_DIR;

// Fresh directory per test, removed on teardown.
class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("thinfilm_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" + std::to_string(getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string &name, const std::string &text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

std::vector<std::string> lines(const fs::path &p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int cli(const std::string &args) {
  const std::string cmd = std::string(THINFILM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kShortRun = "name = short\n"
                              "grid.n = 128\n"
                              "grid.L = 30\n"
                              "time.num_steps = 6\n"
                              "initial.kind = gaussian\n"
                              "initial.variance = 0.8\n"
                              "checks = energy_estimate, moment_bound, entropy_dissipation, weak_form_step\n";

bool near_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

} // namespace

TEST(Scenario, EmptyTextGivesDefaults) { EXPECT_EQ(parse_scenario(""), Scenario{}); }

TEST(Scenario, ErrorsNameTheKey) {
  auto message = [](const std::string &text) {
    try {
      parse_scenario(text);
    } catch (const ConfigError &e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("grid.size = 3\n").find("grid.size"), std::string::npos);
  EXPECT_NE(message("time.tau = 1\ntime.tau = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(message("model.s = one\n").find("model.s"), std::string::npos);
  EXPECT_NE(message("transport.allow_exact = yes\n").find("transport.allow_exact"), std::string::npos);
  EXPECT_NE(message("grid.n = 7\n").find("grid.n"), std::string::npos);
  EXPECT_NE(message("just words\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("initial.kind = gaussian_mixture\n").find("initial.components"), std::string::npos);
  EXPECT_NE(message("initial.kind = blob\n").find("initial.kind"), std::string::npos);
}

TEST(Scenario, EchoReparsesToEqualScenario) {
  for (const char *name : {"reference.scn", "uniform.scn", "mixture.scn", "plane.scn"}) {
    const Scenario sc = load_scenario(kScenarios / name);
    EXPECT_EQ(parse_scenario(echo_scenario(sc)), sc) << name;
  }
  Scenario odd;
  odd.name = "odd";
  odd.s = 1.0 / 3.0;
  odd.tau = 0.1 + 0.2;
  odd.initial.kind = InitialKind::gaussian_mixture;
  odd.initial.components = {{0.1, {std::sqrt(2.0), 0, 0}, 1e-3}, {7.0, {-1e-300, 0, 0}, 2.5}};
  odd.inner.obj_tol = 1e-13;
  odd.evi.times = {0.1, 1.0 / 7.0};
  odd.checks = {"evi_entropy"};
  EXPECT_EQ(parse_scenario(echo_scenario(odd)), odd);
}

TEST_F(TempDir, FromFileResolvesRelativeToScenario) {
  const PeriodicGrid g(1, 16, 4.0);
  fs::create_directories(dir_ / "data");
  write_density(dir_ / "data" / "u0.txt", gaussian_density(g, Point{}, 0.5));
  const fs::path scn = write("s.scn", "grid.n = 16\ngrid.L = 4\ninitial.kind = from_file\ninitial.path = data/u0.txt\n");
  const Scenario sc = load_scenario(scn);
  EXPECT_EQ(fs::path(sc.initial.path), (dir_ / "data" / "u0.txt").lexically_normal());
  const GridDensity u = initial_density(sc);
  const GridDensity want = gaussian_density(g, Point{}, 0.5);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i], want[i], 1e-15);
  EXPECT_EQ(parse_scenario(echo_scenario(sc)), sc);
}

TEST_F(TempDir, DensityFileRejectsWrongShape) {
  const PeriodicGrid g(1, 16, 4.0);
  write_density(dir_ / "u.txt", uniform_density(g));
  EXPECT_THROW(read_density_file(dir_ / "u.txt", PeriodicGrid(1, 32, 4.0)), ConfigError);
  EXPECT_THROW(read_density_file(dir_ / "u.txt", PeriodicGrid(2, 4, 4.0)), ConfigError);
  write("bad.txt", "0 1\n0.5 -2\n");
  EXPECT_THROW(read_density_file(dir_ / "bad.txt", PeriodicGrid(1, 2, 1.0)), ConfigError);
}

TEST_F(TempDir, MissingInitialFileExitsWithPath) {
  const fs::path scn = write("m.scn", "initial.kind = from_file\ninitial.path = nowhere/u0.txt\n");
  std::ostringstream log;
  EXPECT_EQ(cmd_run(scn, dir_ / "out", log), exit_usage);
  EXPECT_NE(log.str().find("nowhere/u0.txt"), std::string::npos) << log.str();
  EXPECT_EQ(cmd_run(dir_ / "absent.scn", dir_ / "out", log), exit_usage);
}

TEST_F(TempDir, UniformRunHasZeroEnergies) {
  std::ostringstream log;
  ASSERT_EQ(cmd_run(kScenarios / "uniform.scn", dir_ / "run", log), exit_ok) << log.str();
  const auto rows = lines(dir_ / "run" / "diagnostics.csv");
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "k,t,energy,entropy,second_moment,w2_sq_step,inner_iters,kkt_residual,boundary_mass");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::string k, t, e;
    std::getline(ss, k, ',');
    std::getline(ss, t, ',');
    std::getline(ss, e, ',');
    EXPECT_EQ(std::stoi(k), static_cast<int>(i));
    EXPECT_LE(std::abs(std::stod(e)), 1e-14);
  }
  EXPECT_EQ(cmd_verify(dir_ / "run", {}, log), exit_ok) << log.str();
}

TEST_F(TempDir, RunThenLoadReproducesInMemoryTrajectory) {
  const fs::path scn = write("short.scn", kShortRun);
  std::ostringstream log;
  ASSERT_EQ(cmd_run(scn, dir_ / "run", log), exit_ok) << log.str();
  const Scenario sc = load_scenario(scn);
  const Trajectory mem = run(initial_density(sc), sc.jko_config(), sc.num_steps);
  const LoadedRun disk = load_run(dir_ / "run");
  EXPECT_EQ(disk.scenario, sc);
  ASSERT_EQ(disk.trajectory.steps.size(), mem.steps.size());
  for (std::size_t k = 0; k < mem.steps.size(); ++k) {
    const auto &a = mem.steps[k], &b = disk.trajectory.steps[k];
    EXPECT_EQ(a.index, b.index);
    EXPECT_TRUE(near_rel(b.energy, a.energy, 1e-12));
    EXPECT_TRUE(near_rel(b.entropy, a.entropy, 1e-12));
    EXPECT_TRUE(near_rel(b.second_moment, a.second_moment, 1e-12));
    EXPECT_TRUE(near_rel(b.w2_to_prev, a.w2_to_prev, 1e-12));
    EXPECT_TRUE(near_rel(b.kkt_residual, a.kkt_residual, 1e-12));
    EXPECT_EQ(a.inner_iterations, b.inner_iterations);
    for (std::size_t i = 0; i < a.density.size(); ++i) EXPECT_TRUE(near_rel(b.density[i], a.density[i], 1e-12));
  }
  // Checks on the reloaded run agree with checks on the in-memory one.
  const CheckReport on_disk = check_energy_estimate(disk.trajectory), in_mem = check_energy_estimate(mem);
  EXPECT_NEAR(on_disk.max_violation, in_mem.max_violation, 1e-12);
}

TEST_F(TempDir, RerunIsByteIdentical) {
  const fs::path scn = write("short.scn", kShortRun);
  std::ostringstream log;
  ASSERT_EQ(cmd_run(scn, dir_ / "a", log), exit_ok);
  ASSERT_EQ(cmd_run(scn, dir_ / "b", log), exit_ok);
  EXPECT_EQ(slurp(dir_ / "a" / "diagnostics.csv"), slurp(dir_ / "b" / "diagnostics.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "manifest.json"), slurp(dir_ / "b" / "manifest.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "snapshots" / snapshot_name(6)), slurp(dir_ / "b" / "snapshots" / snapshot_name(6)));
}

TEST_F(TempDir, VerifyPassesThenCatchesEditedEnergy) {
  const fs::path scn = write("short.scn", kShortRun);
  std::ostringstream log;
  ASSERT_EQ(cmd_run(scn, dir_ / "run", log), exit_ok);
  ASSERT_EQ(cmd_verify(dir_ / "run", {}, log), exit_ok) << log.str();
  for (const char *name : {"energy_estimate", "moment_bound", "entropy_dissipation", "weak_form_step"}) {
    const CheckReport r = check_report_from_json(slurp(dir_ / "run" / "checks" / (std::string(name) + ".json")));
    EXPECT_EQ(r.name, name);
    EXPECT_TRUE(r.passed);
  }

  // Push the energy of step 3 up by 1%.
  auto rows = lines(dir_ / "run" / "diagnostics.csv");
  std::vector<std::string> cols;
  std::stringstream ss(rows[3]);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", std::stod(cols[2]) * 1.01);
  cols[2] = buf;
  std::string edited;
  for (std::size_t i = 0; i < cols.size(); ++i) edited += (i ? "," : "") + cols[i];
  rows[3] = edited;
  std::ofstream out(dir_ / "run" / "diagnostics.csv");
  for (const auto &r : rows) out << r << '\n';
  out.close();
  EXPECT_EQ(cmd_verify(dir_ / "run", {"energy_estimate"}, log), exit_check_failure);
  EXPECT_FALSE(check_report_from_json(slurp(dir_ / "run" / "checks" / "energy_estimate.json")).passed);
}

TEST_F(TempDir, VerifyRejectsUnknownCheckAndMissingRun) {
  const fs::path scn = write("short.scn", kShortRun);
  std::ostringstream log;
  ASSERT_EQ(cmd_run(scn, dir_ / "run", log), exit_ok);
  EXPECT_EQ(cmd_verify(dir_ / "run", {"energy_estimate", "no_such_check"}, log), exit_usage);
  EXPECT_FALSE(fs::exists(dir_ / "run" / "checks" / "energy_estimate.json"));
  EXPECT_EQ(cmd_verify(dir_ / "nothing", {}, log), exit_usage);
}

TEST_F(TempDir, SparseSnapshotsLimitDensityChecks) {
  const fs::path scn = write("sparse.scn", kShortRun + "output.snapshot_stride = 4\n");
  std::ostringstream log;
  ASSERT_EQ(cmd_run(scn, dir_ / "run", log), exit_ok);
  for (int k : {0, 4, 6}) EXPECT_TRUE(fs::exists(dir_ / "run" / "snapshots" / snapshot_name(k))) << k;
  EXPECT_FALSE(fs::exists(dir_ / "run" / "snapshots" / snapshot_name(3)));
  const LoadedRun lr = load_run(dir_ / "run");
  EXPECT_FALSE(lr.trajectory.densities_complete());
  EXPECT_TRUE(lr.trajectory.has_density[3]);
  EXPECT_FALSE(lr.trajectory.has_density[2]);
  EXPECT_EQ(cmd_verify(dir_ / "run", {"energy_estimate", "moment_bound"}, log), exit_ok);
  EXPECT_EQ(cmd_verify(dir_ / "run", {"entropy_dissipation"}, log), exit_usage);
}

TEST_F(TempDir, SolverFailureExitsTwoAndKeepsManifest) {
  const fs::path scn = write("fail.scn", "dimension = 2\ngrid.n = 16\ngrid.L = 8\ninitial.center = 0, 0\n"
                                         "transport.max_iter = 1\ntransport.tol = 1e-14\ntime.num_steps = 2\n");
  std::ostringstream log;
  EXPECT_EQ(cmd_run(scn, dir_ / "run", log), exit_solver_failure);
  EXPECT_NE(log.str().find("step 1"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "run" / "manifest.json").find("\"failed\""), std::string::npos);
}

TEST_F(TempDir, SingleTauSweepGivesEmptyTable) {
  const fs::path scn = write("short.scn", kShortRun);
  std::ostringstream log;
  EXPECT_EQ(cmd_sweep(scn, {1e-3}, {}, dir_ / "sweep", log), exit_ok) << log.str();
  EXPECT_EQ(lines(dir_ / "sweep" / "refinement.csv").size(), 1u);
  EXPECT_EQ(cmd_sweep(scn, {-1e-3}, {}, dir_ / "sweep", log), exit_usage);
}

TEST_F(TempDir, TauSweepIsCauchy) {
  const fs::path scn = write("short.scn", "grid.n = 128\ngrid.L = 30\ntime.num_steps = 8\ntime.tau = 2.5e-3\n");
  std::ostringstream log;
  EXPECT_EQ(cmd_sweep(scn, {4e-3, 2e-3, 1e-3}, {}, dir_ / "sweep", log), exit_ok) << log.str();
  const auto rows = lines(dir_ / "sweep" / "refinement.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "tau_coarse,tau_fine,r,l2_gap,sup_gap,ratio");
}

TEST_F(TempDir, OrderSweepVerifiesEveryRun) {
  const fs::path scn = write("short.scn", kShortRun);
  std::ostringstream log;
  EXPECT_EQ(cmd_sweep(scn, {}, {0.5, 1.0, 1.5, 2.0}, dir_ / "sweep", log), exit_ok) << log.str();
  for (const char *d : {"s_0.5", "s_1", "s_1.5", "s_2"}) {
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / d / "manifest.json")) << d;
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / d / "checks" / "weak_form_step.json")) << d;
  }
  EXPECT_EQ(lines(dir_ / "sweep" / "sweep.csv").size(), 5u);
}

TEST_F(TempDir, PrintConfigEchoesScenario) {
  std::ostringstream out, log;
  EXPECT_EQ(cmd_print_config(kScenarios / "reference.scn", out, log), exit_ok);
  EXPECT_EQ(parse_scenario(out.str()), load_scenario(kScenarios / "reference.scn"));
  EXPECT_EQ(cmd_print_config(dir_ / "none.scn", out, log), exit_usage);
}

TEST_F(TempDir, BinaryExitCodes) {
  const std::string ref = (kScenarios / "reference.scn").string();
  EXPECT_EQ(cli(""), exit_usage);
  EXPECT_EQ(cli("frobnicate"), exit_usage);
  EXPECT_EQ(cli("run --scenario " + ref), exit_usage);
  EXPECT_EQ(cli("print-config --scenario " + ref), exit_ok);
  EXPECT_EQ(cli("--version"), exit_ok);
  EXPECT_EQ(cli("--threads 2 run --scenario " + (kScenarios / "uniform.scn").string() + " --out " +
                (dir_ / "u").string()),
            exit_ok);
  EXPECT_EQ(cli("verify --out " + (dir_ / "u").string() + " --checks energy_estimate"), exit_ok);
  EXPECT_EQ(cli("verify --out " + (dir_ / "u").string() + " --checks bogus"), exit_usage);
  EXPECT_EQ(cli("sweep --scenario " + ref + " --out " + (dir_ / "s").string() + " --tau-list 1e-3,x"), exit_usage);
}
