#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pontrol/errors.hpp"
#include "pontrol/model.hpp"
#include "pontrol/ocp.hpp"
#include "pontrol/solvers.hpp"

namespace pontrol::app {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kSuccess = 0,
  kRuntimeError = 1,
  kConfigError = 2,
  kNotConverged = 3,
  kProbeFailure = 4,
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// One optimal-control scenario. Exactly one of `r0` and `betas` is set.
struct ScenarioConfig {
  ModelKind model = ModelKind::Model1;
  std::optional<double> r0 = 3.0;
  std::optional<TransmissionRates> betas;
  double beta_ratio = 0.1;
  double horizon = 60.0;
  std::size_t steps = 5000;
  EpidemicParams rates;  // betas ignored; taken from r0 or `betas`
  ObjectiveWeights weights;
  double u_max = 0.9;
  NormalizedState initial = reference_initial_state();
  SolverKind solver = SolverKind::Sweep;
  SweepSettings fbsm;
  GradientSettings pgrad;

  EpidemicParams params() const;
  OcpProblem problem() const;
  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Cartesian product of horizons, R0 values, models and control modes.
struct SweepMatrix {
  std::vector<double> horizons{15.0, 30.0, 60.0, 120.0};
  std::vector<double> r0s{3.0, 6.0};
  std::vector<ModelKind> models{ModelKind::Model1, ModelKind::Model2};
  std::vector<bool> controlled{false, true};

  std::size_t size() const {
    return horizons.size() * r0s.size() * models.size() * controlled.size();
  }
  void validate() const;
};

struct VerifyOptions {
  /// Subset of {lemma1, lemma3, terminal, convexity, gradient}; empty runs all.
  std::vector<std::string> probes;
  std::size_t directions = 20;
  std::size_t convexity_trials = 10000;
  std::size_t gradient_controls = 3;
  /// Test hook: corrupt one node of the first checked trajectory.
  bool inject_defect = false;
};

struct AppConfig {
  ScenarioConfig scenario;
  SweepMatrix sweep;
  VerifyOptions verify;
  std::uint64_t seed = 7;
  std::filesystem::path out = "out";

  void validate() const;
};

AppConfig default_config();

/// Applies the keys present in `doc` on top of `base`. Unknown keys, wrong
/// types and conflicting entries raise ConfigError.
AppConfig apply_config(const nlohmann::json& doc, AppConfig base = default_config());
AppConfig load_config(const std::filesystem::path& path,
                      AppConfig base = default_config());
nlohmann::json to_json(const AppConfig& config);

/// Node of largest i + j.
struct PeakSummary {
  std::size_t node = 0;
  double day = 0.0;
  double value = 0.0;
};
PeakSummary find_peak(const StateTrajectory& states);

/// Uncontrolled trajectory of the configured scenario.
StateTrajectory simulate(const ScenarioConfig& scenario);

struct SweepRow {
  ModelKind model = ModelKind::Model1;
  bool controlled = false;
  double horizon = 0.0;
  double r0 = 0.0;
  double active_T = 0.0;  // i(T) + j(T)
  double q_star = 0.0;    // objective of the computed (or zero) control
  std::size_t iterations = 0;
  bool converged = true;
  std::string error;  // empty unless the cell failed
};

/// Runs every cell of the matrix on a pool of `threads` workers (0 selects
/// the PONTROL_THREADS cap or the hardware concurrency). Rows come back in
/// sorted key order (model, controlled, horizon, r0) regardless of timing.
/// When `cell_dir` is set, each cell also writes its trajectory there.
std::vector<SweepRow> execute_sweep(const AppConfig& config,
                                    std::size_t threads = 0,
                                    const std::filesystem::path* cell_dir = nullptr);

/// Worker count from PONTROL_THREADS (when set and positive) capped by the
/// number of tasks.
std::size_t worker_count(std::size_t tasks);

/// CSV writers, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const StateTrajectory& states,
                          const ControlTrajectory* control = nullptr,
                          const SolveReport* report = nullptr);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Probe suite driven by `config.verify`.
std::vector<ProbeReport> run_probes(const AppConfig& config);

/// Gradient probes at `gradient_controls` seeded random interior controls.
std::vector<ProbeReport> run_gradcheck(const AppConfig& config);

/// Smooth random control strictly inside (0, u_max).
ControlTrajectory random_interior_control(const TimeGrid& grid, double u_max,
                                          std::uint64_t seed);

/// Subcommand bodies. Each writes files under config.out, prints a short
/// report to `log` and returns an ExitCode.
int run_simulate(const AppConfig& config, std::ostream& log);
int run_solve(const AppConfig& config, std::ostream& log);
int run_sweep(const AppConfig& config, std::ostream& log);
int run_verify(const AppConfig& config, std::ostream& log);
int run_gradcheck(const AppConfig& config, std::ostream& log);
int run_print_defaults(std::ostream& log);

}  // namespace pontrol::app
