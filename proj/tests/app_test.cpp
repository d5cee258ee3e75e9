#include "pontrol/app.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace pontrol::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pontrol_app_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(PONTROL_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(ConfigTest, DefaultsRoundTrip) {
  const AppConfig base = default_config();
  EXPECT_NO_THROW(base.validate());
  const AppConfig again = apply_config(to_json(base));
  EXPECT_EQ(to_json(again), to_json(base));
  EXPECT_EQ(base.scenario.steps, 5000u);
  EXPECT_EQ(base.scenario.initial, reference_initial_state());
  EXPECT_EQ(base.scenario.solver, SolverKind::Sweep);
}

TEST(ConfigTest, PartialDocumentOverridesBase) {
  const auto c = apply_config(json::parse(R"({
    "model": 2, "r0": 6.0, "horizon": 30, "solver": "pgrad",
    "weights": {"alpha3": 1e-4}, "params": {"q": 0.1},
    "sweep": {"horizons": [45], "models": ["model1"]}
  })"));
  EXPECT_EQ(c.scenario.model, ModelKind::Model2);
  EXPECT_EQ(*c.scenario.r0, 6.0);
  EXPECT_EQ(c.scenario.horizon, 30.0);
  EXPECT_EQ(c.scenario.solver, SolverKind::ProjectedGradient);
  EXPECT_EQ(c.scenario.weights.alpha3, 1e-4);
  EXPECT_EQ(c.scenario.weights.alpha1, 1.0);
  EXPECT_EQ(c.scenario.rates.q, 0.1);
  EXPECT_EQ(c.sweep.horizons, std::vector<double>{45.0});
  EXPECT_EQ(c.sweep.models.size(), 1u);
  EXPECT_EQ(c.sweep.r0s.size(), 2u);
}

TEST(ConfigTest, ExplicitRatesReplaceR0) {
  const auto c = apply_config(json::parse(R"({"beta1": 0.3, "beta2": 0.03})"));
  EXPECT_FALSE(c.scenario.r0.has_value());
  EXPECT_EQ(c.scenario.params().beta1, 0.3);
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(apply_config(json::parse(R"({"r0": 3, "beta1": 0.3, "beta2": 0.03})")),
               ConfigError);
  EXPECT_THROW(apply_config(json::parse(R"({"beta1": 0.3})")), ConfigError);
}

TEST(ConfigTest, RejectsMalformedInput) {
  EXPECT_THROW(apply_config(json::parse(R"({"horizonn": 3})")), ConfigError);
  EXPECT_THROW(apply_config(json::parse(R"({"weights": {"alpha4": 1}})")), ConfigError);
  EXPECT_THROW(apply_config(json::parse(R"({"steps": -3})")), ConfigError);
  EXPECT_THROW(apply_config(json::parse(R"({"steps": "many"})")), ConfigError);
  EXPECT_THROW(apply_config(json::parse(R"({"model": 3})")), ConfigError);
  EXPECT_THROW(apply_config(json::parse(R"({"solver": "bocop"})")), ConfigError);
  auto c = apply_config(json::parse(R"({"u_max": 1.2})"));
  EXPECT_THROW(c.validate(), ConfigError);
  c = apply_config(json::parse(R"({"initial": {"s": 0.5}})"));
  EXPECT_THROW(c.validate(), ConfigError);
  c = apply_config(json::parse(R"({"params": {"sigma1": 0.7}})"));
  EXPECT_THROW(c.validate(), ConfigError);
  c = apply_config(json::parse(R"({"sweep": {"r0": []}})"));
  EXPECT_THROW(c.sweep.validate(), ConfigError);
}

TEST(ConfigTest, LoadsFileWithComments) {
  const auto dir = scratch("load");
  std::ofstream(dir / "c.json") << "{\n  // a comment\n  \"horizon\": 15\n}\n";
  EXPECT_EQ(load_config(dir / "c.json").scenario.horizon, 15.0);
  std::ofstream(dir / "broken.json") << "{ \"horizon\": ";
  EXPECT_THROW(load_config(dir / "broken.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(SimulateTest, PeakOfFlatTrajectoryIsZero) {
  ScenarioConfig sc;
  sc.initial = NormalizedState{1.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  sc.horizon = 180.0;
  const auto peak = find_peak(simulate(sc));
  EXPECT_EQ(peak.value, 0.0);
  EXPECT_EQ(peak.node, 0u);
}

TEST(SimulateTest, PeakLocatesMaximum) {
  ScenarioConfig sc;
  sc.r0 = 6.0;
  sc.horizon = 180.0;
  const auto traj = simulate(sc);
  const auto peak = find_peak(traj);
  for (const auto& x : traj.states) EXPECT_LE(x.active(), peak.value);
  EXPECT_GT(peak.day, 0.0);
  EXPECT_LT(peak.day, 180.0);
}

TEST(CsvTest, HeaderAndPrecision) {
  ScenarioConfig sc;
  sc.horizon = 10.0;
  sc.steps = 4;
  std::ostringstream os;
  write_trajectory_csv(os, simulate(sc));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,s,e,i,j,r,n,u,lambda,A,B");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 22), "0,0.99984999999999991,");
  EXPECT_EQ(line.substr(line.size() - 5), ",0,,,");
}

TEST(CsvTest, RowsSatisfyConservation) {
  AppConfig c = default_config();
  c.scenario.model = ModelKind::Model2;
  c.scenario.horizon = 30.0;
  const auto report = solve_fbsm(c.scenario.problem());
  std::ostringstream os;
  write_trajectory_csv(os, report.states, &report.u_star, &report);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    ASSERT_GE(cells.size(), 9u);
    const double s = std::stod(cells[1]), e = std::stod(cells[2]),
                 i = std::stod(cells[3]), j = std::stod(cells[4]),
                 r = std::stod(cells[5]), n = std::stod(cells[6]);
    EXPECT_NEAR(s + e + i + j + r, n, 1e-9);
    EXPECT_FALSE(cells[8].empty());  // lambda
    ++rows;
  }
  EXPECT_EQ(rows, 5001u);
}

TEST(SweepTest, OrderAndConcurrencyIndependent) {
  AppConfig c = default_config();
  c.scenario.steps = 1000;
  c.sweep.horizons = {30.0, 15.0};
  c.sweep.r0s = {6.0, 3.0};
  const auto serial = execute_sweep(c, 1);
  const auto parallel = execute_sweep(c, 4);
  std::ostringstream a, b;
  write_sweep_csv(a, serial);
  write_sweep_csv(b, parallel);
  EXPECT_EQ(a.str(), b.str());
  ASSERT_EQ(serial.size(), 16u);
  EXPECT_EQ(serial.front().horizon, 15.0);
  EXPECT_EQ(serial.front().r0, 3.0);
  EXPECT_FALSE(serial.front().controlled);
  for (const auto& r : serial) EXPECT_TRUE(r.error.empty()) << r.error;
}

TEST(SweepTest, FailingCellIsRecordedInRow) {
  AppConfig c = default_config();
  c.scenario.steps = 200;
  c.sweep.horizons = {15.0};
  c.sweep.r0s = {3.0, -1.0};
  c.sweep.controlled = {false};
  c.sweep.models = {ModelKind::Model1};
  c.sweep.r0s = {3.0, 1e6};  // RK4 blows up for huge transmission rates
  const auto rows = execute_sweep(c, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].error.empty());
  EXPECT_FALSE(rows[1].error.empty());
  std::ostringstream os;
  write_sweep_csv(os, rows);
  EXPECT_NE(os.str().find("positivity"), std::string::npos);
}

TEST(SweepTest, EmptyMatrixIsAnError) {
  AppConfig c = default_config();
  c.sweep.models.clear();
  EXPECT_THROW(execute_sweep(c, 1), ConfigError);
}

TEST(SweepTest, WorkerCap) {
  ::setenv("PONTROL_THREADS", "3", 1);
  EXPECT_EQ(worker_count(100), 3u);
  EXPECT_EQ(worker_count(2), 2u);
  ::setenv("PONTROL_THREADS", "junk", 1);
  EXPECT_GE(worker_count(100), 1u);
  ::unsetenv("PONTROL_THREADS");
}

TEST(SolveTest, CostOnlyGivesZeroControlColumn) {
  AppConfig c = default_config();
  c.scenario.weights = ObjectiveWeights{0.0, 0.0, 5e-5};
  c.scenario.horizon = 15.0;
  c.out = scratch("costonly");
  std::ostringstream log;
  EXPECT_EQ(run_solve(c, log), kSuccess);
  std::istringstream is(slurp(c.out / "solution.csv"));
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    EXPECT_EQ(cells[7], "0");
  }
  const auto report = json::parse(slurp(c.out / "report.json"));
  EXPECT_TRUE(report["converged"].get<bool>());
}

TEST(ProbesTest, SeededAndSelectable) {
  AppConfig c = default_config();
  c.scenario.horizon = 15.0;
  c.verify.probes = {"gradient"};
  const auto a = run_probes(c);
  const auto b = run_probes(c);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_TRUE(a[k].pass) << a[k].name;
    EXPECT_EQ(a[k].worst_residual, b[k].worst_residual);
  }
  c.verify.probes = {"lemma1"};
  c.verify.inject_defect = true;
  const auto corrupted = run_probes(c);
  EXPECT_FALSE(corrupted.front().pass);
  EXPECT_EQ(corrupted.front().violations, 1u);
}

TEST(ProbesTest, RandomInteriorControl) {
  const TimeGrid g(60.0, 5000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto u = random_interior_control(g, 0.9, seed);
    for (double v : u.values()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 0.9);
    }
  }
}

TEST(CliTest, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string out = " --out " + (dir / "o").string();
  EXPECT_EQ(run_cli("print-defaults"), kSuccess);
  EXPECT_EQ(run_cli("simulate --horizon 30 --steps 600" + out), kSuccess);
  EXPECT_EQ(run_cli("solve --horizon 15 --steps 500" + out), kSuccess);
  EXPECT_EQ(run_cli("verify --probe gradient --horizon 15" + out), kSuccess);
  EXPECT_EQ(run_cli("verify --probe lemma1 --inject-defect --steps 500" + out),
            kProbeFailure);
  EXPECT_EQ(run_cli("gradcheck --model 2 --horizon 15" + out), kSuccess);
  EXPECT_EQ(run_cli("simulate --model 7" + out), kConfigError);
  EXPECT_EQ(run_cli("simulate --steps 1" + out), kConfigError);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "none.json").string() + out),
            kConfigError);
  std::ofstream(dir / "n.json") << R"({"fbsm": {"max_iters": 2}})";
  EXPECT_EQ(run_cli("solve --config " + (dir / "n.json").string() + out),
            kNotConverged);
  EXPECT_TRUE(fs::exists(dir / "o" / "solution.csv"));
}

TEST(CliTest, SweepOutputIsBitReproducible) {
  const auto a = scratch("sweep_a");
  const auto b = scratch("sweep_b");
  const std::string args = "sweep --steps 1000 --horizon 30 --seed 5";
  ASSERT_EQ(run_cli(args + " --out " + a.string()), kSuccess);
  ASSERT_EQ(run_cli(args + " --out " + b.string()), kSuccess);
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
  EXPECT_EQ(slurp(a / "cells" / "model2_controlled_T30_r6.csv"),
            slurp(b / "cells" / "model2_controlled_T30_r6.csv"));
}

}  // namespace
}  // namespace pontrol::app
