#include "pontrol/app.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "pontrol/verification.hpp"

namespace pontrol::app {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// Rejects keys of `obj` outside `allowed`, naming the section.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& section) {
  require(obj.is_object(), section + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    require(allowed.count(key) == 1,
            "unknown key '" + key + "' in " + section);
  }
}

double get_number(const json& obj, const char* key, const std::string& section) {
  const auto& v = obj.at(key);
  require(v.is_number(), section + "." + key + " must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& obj, const char* key, const std::string& section) {
  const auto& v = obj.at(key);
  require(v.is_number_integer() && v.get<long long>() >= 0,
          section + "." + key + " must be a non-negative integer");
  return v.get<std::size_t>();
}

template <typename Fn>
void maybe(const json& obj, const char* key, Fn&& fn) {
  if (obj.contains(key)) fn(obj.at(key));
}

ModelKind parse_model(const json& v) {
  if (v.is_number_integer()) {
    const auto m = v.get<long long>();
    require(m == 1 || m == 2, "model must be 1 or 2");
    return m == 1 ? ModelKind::Model1 : ModelKind::Model2;
  }
  require(v.is_string(), "model must be 1, 2, \"model1\" or \"model2\"");
  const auto s = v.get<std::string>();
  if (s == "1" || s == "model1") return ModelKind::Model1;
  if (s == "2" || s == "model2") return ModelKind::Model2;
  throw ConfigError("unknown model '" + s + "'");
}

SolverKind parse_solver(const json& v) {
  require(v.is_string(), "solver must be a string");
  const auto s = v.get<std::string>();
  if (s == "fbsm") return SolverKind::Sweep;
  if (s == "pgrad") return SolverKind::ProjectedGradient;
  throw ConfigError("unknown solver '" + s + "' (expected fbsm or pgrad)");
}

std::vector<double> number_list(const json& v, const std::string& name) {
  require(v.is_array(), name + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    require(x.is_number(), name + " must be a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

int model_number(ModelKind kind) { return kind == ModelKind::Model1 ? 1 : 2; }

void apply_scenario(const json& doc, ScenarioConfig& sc) {
  const std::string top = "config";
  maybe(doc, "model", [&](const json& v) { sc.model = parse_model(v); });
  const bool has_r0 = doc.contains("r0");
  const bool has_beta = doc.contains("beta1") || doc.contains("beta2");
  require(!(has_r0 && has_beta), "r0 and explicit beta1/beta2 are exclusive");
  if (has_r0) {
    sc.r0 = get_number(doc, "r0", top);
    sc.betas.reset();
  }
  if (has_beta) {
    require(doc.contains("beta1") && doc.contains("beta2"),
            "explicit rates need both beta1 and beta2");
    sc.betas = TransmissionRates{get_number(doc, "beta1", top),
                                 get_number(doc, "beta2", top)};
    sc.r0.reset();
  }
  maybe(doc, "beta_ratio", [&](const json&) {
    sc.beta_ratio = get_number(doc, "beta_ratio", top);
  });
  maybe(doc, "horizon", [&](const json&) { sc.horizon = get_number(doc, "horizon", top); });
  maybe(doc, "steps", [&](const json&) { sc.steps = get_count(doc, "steps", top); });
  maybe(doc, "u_max", [&](const json&) { sc.u_max = get_number(doc, "u_max", top); });
  maybe(doc, "solver", [&](const json& v) { sc.solver = parse_solver(v); });

  maybe(doc, "params", [&](const json& p) {
    const std::string sec = "params";
    check_keys(p, {"gamma", "sigma1", "sigma2", "rho1", "rho2", "q"}, sec);
    maybe(p, "gamma", [&](const json&) { sc.rates.gamma = get_number(p, "gamma", sec); });
    maybe(p, "sigma1", [&](const json&) { sc.rates.sigma1 = get_number(p, "sigma1", sec); });
    maybe(p, "sigma2", [&](const json&) { sc.rates.sigma2 = get_number(p, "sigma2", sec); });
    maybe(p, "rho1", [&](const json&) { sc.rates.rho1 = get_number(p, "rho1", sec); });
    maybe(p, "rho2", [&](const json&) { sc.rates.rho2 = get_number(p, "rho2", sec); });
    maybe(p, "q", [&](const json&) { sc.rates.q = get_number(p, "q", sec); });
  });
  maybe(doc, "weights", [&](const json& w) {
    const std::string sec = "weights";
    check_keys(w, {"alpha1", "alpha2", "alpha3"}, sec);
    maybe(w, "alpha1", [&](const json&) { sc.weights.alpha1 = get_number(w, "alpha1", sec); });
    maybe(w, "alpha2", [&](const json&) { sc.weights.alpha2 = get_number(w, "alpha2", sec); });
    maybe(w, "alpha3", [&](const json&) { sc.weights.alpha3 = get_number(w, "alpha3", sec); });
  });
  maybe(doc, "initial", [&](const json& x) {
    const std::string sec = "initial";
    check_keys(x, {"s", "e", "i", "j", "r"}, sec);
    maybe(x, "s", [&](const json&) { sc.initial.s = get_number(x, "s", sec); });
    maybe(x, "e", [&](const json&) { sc.initial.e = get_number(x, "e", sec); });
    maybe(x, "i", [&](const json&) { sc.initial.i = get_number(x, "i", sec); });
    maybe(x, "j", [&](const json&) { sc.initial.j = get_number(x, "j", sec); });
    maybe(x, "r", [&](const json&) { sc.initial.r = get_number(x, "r", sec); });
    sc.initial.n = 1.0;
  });
  maybe(doc, "fbsm", [&](const json& f) {
    const std::string sec = "fbsm";
    check_keys(f, {"relaxation", "max_iters", "tol_u", "tol_q", "initial_guess"}, sec);
    maybe(f, "relaxation", [&](const json&) { sc.fbsm.relaxation = get_number(f, "relaxation", sec); });
    maybe(f, "max_iters", [&](const json&) { sc.fbsm.max_iters = get_count(f, "max_iters", sec); });
    maybe(f, "tol_u", [&](const json&) { sc.fbsm.tol_u = get_number(f, "tol_u", sec); });
    maybe(f, "tol_q", [&](const json&) { sc.fbsm.tol_q = get_number(f, "tol_q", sec); });
    maybe(f, "initial_guess", [&](const json& v) {
      if (v.is_null()) {
        sc.fbsm.initial_guess.reset();
      } else {
        sc.fbsm.initial_guess = get_number(f, "initial_guess", sec);
      }
    });
  });
  maybe(doc, "pgrad", [&](const json& g) {
    const std::string sec = "pgrad";
    check_keys(g, {"gradient", "max_iters", "tol", "armijo", "backtrack",
                   "max_backtracks", "initial_guess"},
               sec);
    maybe(g, "gradient", [&](const json& v) {
      require(v.is_string(), "pgrad.gradient must be a string");
      const auto s = v.get<std::string>();
      require(s == "discrete" || s == "continuous",
              "pgrad.gradient must be discrete or continuous");
      sc.pgrad.source =
          s == "discrete" ? GradientSource::Discrete : GradientSource::Continuous;
    });
    maybe(g, "max_iters", [&](const json&) { sc.pgrad.max_iters = get_count(g, "max_iters", sec); });
    maybe(g, "tol", [&](const json&) { sc.pgrad.tol = get_number(g, "tol", sec); });
    maybe(g, "armijo", [&](const json&) { sc.pgrad.armijo = get_number(g, "armijo", sec); });
    maybe(g, "backtrack", [&](const json&) { sc.pgrad.backtrack = get_number(g, "backtrack", sec); });
    maybe(g, "max_backtracks", [&](const json&) {
      sc.pgrad.max_backtracks = get_count(g, "max_backtracks", sec);
    });
    maybe(g, "initial_guess", [&](const json& v) {
      if (v.is_null()) {
        sc.pgrad.initial_guess.reset();
      } else {
        sc.pgrad.initial_guess = get_number(g, "initial_guess", sec);
      }
    });
  });
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell_key(ModelKind model, bool controlled, double T, double r0) {
  std::ostringstream os;
  os << "model" << model_number(model) << '_'
     << (controlled ? "controlled" : "free") << "_T" << T << "_r" << r0;
  return os.str();
}

std::string cell_key(const SweepRow& row) {
  return cell_key(row.model, row.controlled, row.horizon, row.r0);
}

void print_probe(std::ostream& log, const ProbeReport& r) {
  log << (r.pass ? "PASS " : "FAIL ") << r.name << " trials=" << r.trials
      << " violations=" << r.violations << " worst=" << r.worst_residual;
  if (r.vacuous) log << " (vacuous)";
  if (!r.detail.empty()) log << " [" << r.detail << "]";
  log << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  return os;
}

json report_json(const SolveReport& r) {
  json probes = json::array();
  for (const auto& p : r.lemma_probes) {
    probes.push_back({{"name", p.name},
                      {"pass", p.pass},
                      {"vacuous", p.vacuous},
                      {"violations", p.violations},
                      {"detail", p.detail}});
  }
  const auto& x = r.states.terminal();
  return {{"model", std::string(to_string(r.problem.kind))},
          {"solver", std::string(to_string(r.solver))},
          {"horizon", r.problem.grid.horizon()},
          {"steps", r.problem.grid.steps()},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"q_star", r.q_star},
          {"stationarity_residual", r.stationarity_residual},
          {"pmp_residual", r.pmp_residual},
          {"active_T", x.active()},
          {"infected_T", x.infected()},
          {"u_T", r.u_star[r.u_star.size() - 1]},
          {"probes", probes}};
}

bool selected(const VerifyOptions& v, const std::string& name) {
  return v.probes.empty() ||
         std::find(v.probes.begin(), v.probes.end(), name) != v.probes.end();
}

}  // namespace

EpidemicParams ScenarioConfig::params() const {
  EpidemicParams p = rates;
  if (betas) {
    p.beta1 = betas->beta1;
    p.beta2 = betas->beta2;
  } else {
    const auto b = beta_from_r0(r0.value_or(0.0), p, beta_ratio);
    p.beta1 = b.beta1;
    p.beta2 = b.beta2;
  }
  return p;
}

OcpProblem ScenarioConfig::problem() const {
  OcpProblem pr;
  pr.kind = model;
  pr.params = params();
  pr.weights = weights;
  pr.bounds = ControlBounds{u_max};
  pr.initial = initial;
  pr.grid = TimeGrid(horizon, steps);
  return pr;
}

void ScenarioConfig::validate() const {
  require(r0.has_value() != betas.has_value(),
          "exactly one of r0 and beta1/beta2 must be given");
  if (r0) require(*r0 > 0.0 && std::isfinite(*r0), "r0 must be positive");
  require(beta_ratio >= 0.0 && beta_ratio < 1.0,
          "beta_ratio must lie in [0, 1)");
  require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
  require(steps >= 2, "steps must be at least 2");
  try {
    problem().validate();
    fbsm.validate();
    pgrad.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void SweepMatrix::validate() const {
  require(size() > 0, "sweep matrix is empty");
  for (double t : horizons) require(t > 0.0, "sweep horizons must be positive");
  for (double r : r0s) require(r > 0.0, "sweep r0 values must be positive");
}

void AppConfig::validate() const {
  scenario.validate();
  require(!out.empty(), "output directory must not be empty");
  for (const auto& p : verify.probes) {
    require(p == "lemma1" || p == "lemma3" || p == "terminal" ||
                p == "convexity" || p == "gradient",
            "unknown probe '" + p + "'");
  }
  require(verify.convexity_trials > 0, "convexity_trials must be positive");
  require(verify.directions > 0, "directions must be positive");
}

AppConfig default_config() { return AppConfig{}; }

AppConfig apply_config(const json& doc, AppConfig base) {
  check_keys(doc,
             {"model", "r0", "beta1", "beta2", "beta_ratio", "horizon", "steps",
              "u_max", "solver", "params", "weights", "initial", "fbsm", "pgrad",
              "seed", "out", "sweep", "verify"},
             "config");
  apply_scenario(doc, base.scenario);
  maybe(doc, "seed", [&](const json&) { base.seed = get_count(doc, "seed", "config"); });
  maybe(doc, "out", [&](const json& v) {
    require(v.is_string(), "out must be a string");
    base.out = v.get<std::string>();
  });
  maybe(doc, "sweep", [&](const json& s) {
    check_keys(s, {"horizons", "r0", "models", "controlled"}, "sweep");
    maybe(s, "horizons", [&](const json& v) {
      base.sweep.horizons = number_list(v, "sweep.horizons");
    });
    maybe(s, "r0", [&](const json& v) { base.sweep.r0s = number_list(v, "sweep.r0"); });
    maybe(s, "models", [&](const json& v) {
      require(v.is_array(), "sweep.models must be a list");
      base.sweep.models.clear();
      for (const auto& m : v) base.sweep.models.push_back(parse_model(m));
    });
    maybe(s, "controlled", [&](const json& v) {
      require(v.is_array(), "sweep.controlled must be a list of booleans");
      base.sweep.controlled.clear();
      for (const auto& c : v) {
        require(c.is_boolean(), "sweep.controlled must be a list of booleans");
        base.sweep.controlled.push_back(c.get<bool>());
      }
    });
  });
  maybe(doc, "verify", [&](const json& v) {
    const std::string sec = "verify";
    check_keys(v, {"probes", "directions", "convexity_trials", "gradient_controls"}, sec);
    maybe(v, "probes", [&](const json& list) {
      require(list.is_array(), "verify.probes must be a list of names");
      base.verify.probes.clear();
      for (const auto& p : list) {
        require(p.is_string(), "verify.probes must be a list of names");
        base.verify.probes.push_back(p.get<std::string>());
      }
    });
    maybe(v, "directions", [&](const json&) {
      base.verify.directions = get_count(v, "directions", sec);
    });
    maybe(v, "convexity_trials", [&](const json&) {
      base.verify.convexity_trials = get_count(v, "convexity_trials", sec);
    });
    maybe(v, "gradient_controls", [&](const json&) {
      base.verify.gradient_controls = get_count(v, "gradient_controls", sec);
    });
  });
  return base;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return apply_config(doc, std::move(base));
}

json to_json(const AppConfig& c) {
  const auto& sc = c.scenario;
  json doc;
  doc["model"] = model_number(sc.model);
  if (sc.r0) {
    doc["r0"] = *sc.r0;
  } else if (sc.betas) {
    doc["beta1"] = sc.betas->beta1;
    doc["beta2"] = sc.betas->beta2;
  }
  doc["beta_ratio"] = sc.beta_ratio;
  doc["horizon"] = sc.horizon;
  doc["steps"] = sc.steps;
  doc["u_max"] = sc.u_max;
  doc["solver"] = std::string(to_string(sc.solver));
  doc["params"] = {{"gamma", sc.rates.gamma}, {"sigma1", sc.rates.sigma1},
                   {"sigma2", sc.rates.sigma2}, {"rho1", sc.rates.rho1},
                   {"rho2", sc.rates.rho2}, {"q", sc.rates.q}};
  doc["weights"] = {{"alpha1", sc.weights.alpha1},
                    {"alpha2", sc.weights.alpha2},
                    {"alpha3", sc.weights.alpha3}};
  doc["initial"] = {{"s", sc.initial.s}, {"e", sc.initial.e}, {"i", sc.initial.i},
                    {"j", sc.initial.j}, {"r", sc.initial.r}};
  auto guess = [](const std::optional<double>& g) {
    return g ? json(*g) : json(nullptr);
  };
  doc["fbsm"] = {{"relaxation", sc.fbsm.relaxation},
                 {"max_iters", sc.fbsm.max_iters},
                 {"tol_u", sc.fbsm.tol_u},
                 {"tol_q", sc.fbsm.tol_q},
                 {"initial_guess", guess(sc.fbsm.initial_guess)}};
  doc["pgrad"] = {
      {"gradient", sc.pgrad.source == GradientSource::Discrete ? "discrete" : "continuous"},
      {"max_iters", sc.pgrad.max_iters},
      {"tol", sc.pgrad.tol},
      {"armijo", sc.pgrad.armijo},
      {"backtrack", sc.pgrad.backtrack},
      {"max_backtracks", sc.pgrad.max_backtracks},
      {"initial_guess", guess(sc.pgrad.initial_guess)}};
  doc["seed"] = c.seed;
  doc["out"] = c.out.string();
  json models = json::array();
  for (auto m : c.sweep.models) models.push_back(model_number(m));
  doc["sweep"] = {{"horizons", c.sweep.horizons},
                  {"r0", c.sweep.r0s},
                  {"models", models},
                  {"controlled", c.sweep.controlled}};
  doc["verify"] = {{"probes", c.verify.probes},
                   {"directions", c.verify.directions},
                   {"convexity_trials", c.verify.convexity_trials},
                   {"gradient_controls", c.verify.gradient_controls}};
  return doc;
}

PeakSummary find_peak(const StateTrajectory& states) {
  PeakSummary best;
  for (std::size_t k = 0; k < states.states.size(); ++k) {
    const double v = states.states[k].active();
    if (v > best.value) best = {k, states.grid.time(k), v};
  }
  return best;
}

StateTrajectory simulate(const ScenarioConfig& scenario) {
  return integrate_forward(scenario.model, scenario.params(), scenario.initial,
                           TimeGrid(scenario.horizon, scenario.steps));
}

std::size_t worker_count(std::size_t tasks) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PONTROL_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = static_cast<std::size_t>(cap);
  }
  return std::max<std::size_t>(1, std::min(n, tasks));
}

std::vector<SweepRow> execute_sweep(const AppConfig& config, std::size_t threads,
                                    const std::filesystem::path* cell_dir) {
  config.sweep.validate();
  std::vector<SweepRow> rows;
  for (auto model : config.sweep.models) {
    for (bool controlled : config.sweep.controlled) {
      for (double T : config.sweep.horizons) {
        for (double r0 : config.sweep.r0s) {
          SweepRow row;
          row.model = model;
          row.controlled = controlled;
          row.horizon = T;
          row.r0 = r0;
          rows.push_back(row);
        }
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tuple(model_number(a.model), a.controlled, a.horizon, a.r0) <
           std::tuple(model_number(b.model), b.controlled, b.horizon, b.r0);
  });

  auto run_cell = [&](SweepRow& row) {
    try {
      ScenarioConfig sc = config.scenario;
      sc.model = row.model;
      sc.r0 = row.r0;
      sc.betas.reset();
      sc.horizon = row.horizon;
      sc.validate();
      const OcpProblem problem = sc.problem();
      std::optional<StateTrajectory> states;
      std::optional<SolveReport> report;
      if (row.controlled) {
        report = sc.solver == SolverKind::Sweep
                     ? solve_fbsm(problem, sc.fbsm)
                     : solve_projected_gradient(problem, sc.pgrad);
        row.q_star = report->q_star;
        row.iterations = report->iterations;
        row.converged = report->converged;
        states = report->states;
      } else {
        const auto zero = ControlTrajectory::constant(problem.grid, 0.0);
        states = integrate_forward(problem.kind, problem.params, problem.initial, zero);
        row.q_star = objective(*states, zero, problem.weights);
      }
      row.active_T = states->terminal().active();
      if (cell_dir) {
        auto os = open_output(*cell_dir / (cell_key(row) + ".csv"));
        write_trajectory_csv(os, *states, report ? &report->u_star : nullptr,
                             report ? &*report : nullptr);
      }
    } catch (const std::exception& e) {
      row.converged = false;
      row.error = e.what();
    }
  };

  const std::size_t workers = threads > 0 ? std::min(threads, rows.size())
                                          : worker_count(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) run_cell(rows[k]);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_trajectory_csv(std::ostream& os, const StateTrajectory& states,
                          const ControlTrajectory* control,
                          const SolveReport* report) {
  os << "t,s,e,i,j,r,n,u,lambda,A,B\n";
  std::vector<double> lambda;
  std::vector<HamiltonianCoeffs> coeffs;
  const bool model1 = report && report->problem.kind == ModelKind::Model1;
  if (report) {
    lambda = report->indicator();
    if (model1) coeffs = report->coefficients();
  }
  for (std::size_t k = 0; k < states.states.size(); ++k) {
    const auto& x = states.states[k];
    os << fmt17(states.grid.time(k));
    for (double v : x.as_array()) os << ',' << fmt17(v);
    os << ',' << fmt17(control ? (*control)[k] : 0.0) << ',';
    if (report && std::isfinite(lambda[k])) os << fmt17(lambda[k]);
    os << ',';
    if (model1) os << fmt17(coeffs[k].A);
    os << ',';
    if (model1) os << fmt17(coeffs[k].B);
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "model,controlled,T,r0,active_T,q_star,iterations,converged,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << model_number(r.model) << ',' << (r.controlled ? 1 : 0) << ','
       << fmt17(r.horizon) << ',' << fmt17(r.r0) << ','
       << (r.error.empty() ? fmt17(r.active_T) : "") << ','
       << (r.error.empty() ? fmt17(r.q_star) : "") << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ',' << err << '\n';
  }
}

ControlTrajectory random_interior_control(const TimeGrid& grid, double u_max,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double mid = u_max * (0.3 + 0.4 * unit(rng));
  const double amp = std::min(mid, u_max - mid) * 0.8 * unit(rng);
  const double freq = 2.0 * std::numbers::pi * (0.5 + 2.5 * unit(rng)) / grid.horizon();
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  std::vector<double> u(grid.nodes());
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = mid + amp * std::sin(freq * grid.time(k) + phase);
  }
  return ControlTrajectory(grid, std::move(u));
}

std::vector<ProbeReport> run_gradcheck(const AppConfig& config) {
  const OcpProblem problem = config.scenario.problem();
  GradientProbeConfig gc;
  gc.directions = config.verify.directions;
  std::vector<ProbeReport> out;
  for (std::size_t c = 0; c < config.verify.gradient_controls; ++c) {
    gc.seed = config.seed + c;
    const auto u = random_interior_control(problem.grid, problem.bounds.u_max,
                                           config.seed * 1000003u + c);
    auto r = probe_gradient(problem, u, gc);
    r.name += "_" + std::string(to_string(problem.kind)) + "_control" +
              std::to_string(c);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ProbeReport> run_probes(const AppConfig& config) {
  const auto& v = config.verify;
  const auto& sc = config.scenario;
  std::vector<ProbeReport> out;

  if (selected(v, "lemma1")) {
    bool first = true;
    for (auto model : {ModelKind::Model1, ModelKind::Model2}) {
      for (double r0 : config.sweep.r0s) {
        for (double T : config.sweep.horizons) {
          ScenarioConfig cell = sc;
          cell.model = model;
          cell.r0 = r0;
          cell.betas.reset();
          cell.horizon = T;
          auto traj = simulate(cell);
          if (first && v.inject_defect && traj.states.size() > 5) {
            traj.states[5].e = -0.01;
          }
          first = false;
          auto r = probe_lemma1(traj);
          r.name += "_" + cell_key(model, false, T, r0);
          out.push_back(std::move(r));
        }
      }
    }
  }

  const bool need_solve = selected(v, "lemma3") || selected(v, "terminal");
  if (need_solve) {
    for (auto model : {ModelKind::Model1, ModelKind::Model2}) {
      ScenarioConfig cell = sc;
      cell.model = model;
      const auto report = solve_fbsm(cell.problem(), cell.fbsm);
      for (const auto& p : report.lemma_probes) {
        const bool is_lemma3 = p.name.rfind("lemma3", 0) == 0;
        if (is_lemma3 ? !selected(v, "lemma3") : !selected(v, "terminal")) continue;
        ProbeReport r = p;
        r.name += "_" + std::string(to_string(model));
        out.push_back(std::move(r));
      }
      if (selected(v, "lemma1")) {
        auto r = probe_lemma1(report.states);
        r.name += "_" + std::string(to_string(model)) + "_optimal";
        out.push_back(std::move(r));
      }
    }
  }

  if (selected(v, "convexity")) {
    ConvexityProbeConfig cc;
    cc.trials = v.convexity_trials;
    cc.seed = config.seed;
    cc.u_max = sc.u_max;
    cc.alpha3 = sc.weights.alpha3;
    const auto p = sc.params();
    cc.beta1 = p.beta1;
    cc.beta2 = p.beta2;
    out.push_back(probe_convexity(cc));
  }

  if (selected(v, "gradient")) {
    for (auto model : {ModelKind::Model1, ModelKind::Model2}) {
      AppConfig cell = config;
      cell.scenario.model = model;
      for (auto& r : run_gradcheck(cell)) out.push_back(std::move(r));
    }
  }
  return out;
}

int run_simulate(const AppConfig& config, std::ostream& log) {
  const auto traj = simulate(config.scenario);
  const auto peak = find_peak(traj);
  {
    auto os = open_output(config.out / "simulate.csv");
    write_trajectory_csv(os, traj);
  }
  json summary = {{"model", std::string(to_string(config.scenario.model))},
                  {"horizon", config.scenario.horizon},
                  {"peak_day", peak.day},
                  {"peak_active", peak.value},
                  {"active_T", traj.terminal().active()},
                  {"max_conservation_residual", traj.max_conservation_residual()}};
  {
    auto os = open_output(config.out / "simulate_summary.json");
    os << summary.dump(2) << '\n';
  }
  log << "peak of i+j: day " << fmt17(peak.day) << ", value " << fmt17(peak.value)
      << '\n'
      << "i(T)+j(T) = " << fmt17(traj.terminal().active()) << '\n';
  return kSuccess;
}

int run_solve(const AppConfig& config, std::ostream& log) {
  const auto& sc = config.scenario;
  const OcpProblem problem = sc.problem();
  const SolveReport report = sc.solver == SolverKind::Sweep
                                 ? solve_fbsm(problem, sc.fbsm)
                                 : solve_projected_gradient(problem, sc.pgrad);
  {
    auto os = open_output(config.out / "solution.csv");
    write_trajectory_csv(os, report.states, &report.u_star, &report);
  }
  const json summary = report_json(report);
  {
    auto os = open_output(config.out / "report.json");
    os << summary.dump(2) << '\n';
  }
  log << "solver " << to_string(report.solver) << ": "
      << (report.converged ? "converged" : "NOT converged") << " after "
      << report.iterations << " iterations\n"
      << "Q* = " << fmt17(report.q_star) << '\n'
      << "i(T)+j(T) = " << fmt17(report.states.terminal().active()) << '\n'
      << "stationarity residual = " << report.stationarity_residual << '\n';
  for (const auto& p : report.lemma_probes) print_probe(log, p);
  return report.converged ? kSuccess : kNotConverged;
}

int run_sweep(const AppConfig& config, std::ostream& log) {
  const auto cells = config.out / "cells";
  const auto rows = execute_sweep(config, 0, &cells);
  {
    auto os = open_output(config.out / "summary.csv");
    write_sweep_csv(os, rows);
  }
  bool failed = false;
  bool unconverged = false;
  for (const auto& r : rows) {
    log << cell_key(r) << ": ";
    if (!r.error.empty()) {
      log << "error: " << r.error << '\n';
      failed = true;
      continue;
    }
    log << "i(T)+j(T) = " << fmt17(r.active_T);
    if (r.controlled) log << (r.converged ? "" : " (not converged)");
    log << '\n';
    unconverged = unconverged || !r.converged;
  }
  if (failed) return kRuntimeError;
  return unconverged ? kNotConverged : kSuccess;
}

int run_verify(const AppConfig& config, std::ostream& log) {
  const auto probes = run_probes(config);
  bool ok = true;
  for (const auto& p : probes) {
    print_probe(log, p);
    ok = ok && p.pass;
  }
  log << (ok ? "all probes passed" : "probe failures") << " (" << probes.size()
      << " probes)\n";
  return ok ? kSuccess : kProbeFailure;
}

int run_gradcheck(const AppConfig& config, std::ostream& log) {
  const auto probes = run_gradcheck(config);
  bool ok = true;
  for (const auto& p : probes) {
    print_probe(log, p);
    ok = ok && p.pass;
  }
  return ok ? kSuccess : kProbeFailure;
}

int run_print_defaults(std::ostream& log) {
  log << to_json(default_config()).dump(2) << '\n';
  return kSuccess;
}

}  // namespace pontrol::app
