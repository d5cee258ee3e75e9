// Command-line front end: simulate, solve, sweep, verify, gradcheck and
// print-defaults over a JSON scenario configuration.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "pontrol/app.hpp"

namespace {

using namespace pontrol;

struct Overrides {
  std::string config;
  std::optional<int> model;
  std::optional<double> r0;
  std::optional<double> horizon;
  std::optional<std::size_t> steps;
  std::optional<std::string> solver;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> probes;
  std::optional<std::size_t> directions;
  bool inject_defect = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--model", o.model, "Incidence model")->check(CLI::IsMember({1, 2}));
  cmd->add_option("--r0", o.r0, "Basic reproductive ratio");
  cmd->add_option("--horizon", o.horizon, "Time horizon in days");
  cmd->add_option("--steps", o.steps, "Number of RK4 steps");
  cmd->add_option("--solver", o.solver, "fbsm or pgrad")
      ->check(CLI::IsMember({"fbsm", "pgrad"}));
  cmd->add_option("--seed", o.seed, "Seed of randomized probes");
  cmd->add_option("--out", o.out, "Output directory");
}

// File values first, then flags. For `sweep`, a scalar flag narrows the
// corresponding matrix axis to that single value.
app::AppConfig resolve(const Overrides& o, bool sweep) {
  app::AppConfig c = o.config.empty() ? app::default_config()
                                      : app::load_config(o.config);
  nlohmann::json patch = nlohmann::json::object();
  if (o.model) patch["model"] = *o.model;
  if (o.r0) patch["r0"] = *o.r0;
  if (o.horizon) patch["horizon"] = *o.horizon;
  if (o.steps) patch["steps"] = *o.steps;
  if (o.solver) patch["solver"] = *o.solver;
  if (o.seed) patch["seed"] = *o.seed;
  if (o.out) patch["out"] = *o.out;
  c = app::apply_config(patch, std::move(c));
  if (sweep) {
    if (o.model) {
      c.sweep.models = {*o.model == 1 ? ModelKind::Model1 : ModelKind::Model2};
    }
    if (o.r0) c.sweep.r0s = {*o.r0};
    if (o.horizon) c.sweep.horizons = {*o.horizon};
  }
  if (!o.probes.empty()) c.verify.probes = o.probes;
  if (o.directions) c.verify.directions = *o.directions;
  c.verify.inject_defect = o.inject_defect;
  c.validate();
  if (sweep) c.sweep.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Optimal quarantine control for SEIR-type epidemic models"};
  cli.require_subcommand(1);
  Overrides o;

  auto* simulate = cli.add_subcommand("simulate", "Uncontrolled trajectory and peak");
  auto* solve = cli.add_subcommand("solve", "Solve the optimal control problem");
  auto* sweep = cli.add_subcommand("sweep", "Run the horizon x R0 x model matrix");
  auto* verify = cli.add_subcommand("verify", "Run the verification probes");
  auto* gradcheck = cli.add_subcommand("gradcheck", "Adjoint gradient vs finite differences");
  auto* defaults = cli.add_subcommand("print-defaults", "Print the default configuration");
  for (auto* cmd : {simulate, solve, sweep, verify, gradcheck}) add_common(cmd, o);
  verify->add_option("--probe", o.probes,
                     "Restrict to lemma1, lemma3, terminal, convexity, gradient");
  verify->add_option("--directions", o.directions, "Gradient probe directions");
  verify->add_flag("--inject-defect", o.inject_defect,
                   "Corrupt one trajectory node (self-test of the suite)");
  gradcheck->add_option("--directions", o.directions, "Probe directions");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kConfigError;
  }

  try {
    if (defaults->parsed()) return app::run_print_defaults(std::cout);
    const bool is_sweep = sweep->parsed();
    const app::AppConfig config = resolve(o, is_sweep);
    if (simulate->parsed()) return app::run_simulate(config, std::cout);
    if (solve->parsed()) return app::run_solve(config, std::cout);
    if (is_sweep) return app::run_sweep(config, std::cout);
    if (verify->parsed()) return app::run_verify(config, std::cout);
    if (gradcheck->parsed()) return app::run_gradcheck(config, std::cout);
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return app::kConfigError;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return app::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kRuntimeError;
  }
  return app::kRuntimeError;
}
