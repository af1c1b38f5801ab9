#pragma once

// JSON experiment files. Schema (see README for the full description):
//
//   name, algorithm | algorithms, seed, graph, objective, set, schedule,
//   integrator, discrete, projected, init, reference_tol, output

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcpf/baselines.hpp"
#include "dcpf/dynamics.hpp"

namespace dcpf {

using Json = nlohmann::json;

enum class Algorithm { cg_ode, cg_discrete, defw, projected };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::cg_ode: return "cg_ode";
    case Algorithm::cg_discrete: return "cg_discrete";
    case Algorithm::defw: return "defw";
    case Algorithm::projected: return "projected";
  }
  return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::cg_ode, Algorithm::cg_discrete, Algorithm::defw, Algorithm::projected}) {
    if (name == to_string(a)) return a;
  }
  return std::nullopt;
}

struct ExperimentConfig {
  std::string name;
  std::vector<Algorithm> algorithms;
  Problem problem;
  Schedule schedule = Schedule::inverse_linear(1.0);
  IntegratorConfig integrator;
  DiscreteConfig discrete;
  ProjectedConfig projected;
  std::optional<AgentMatrix> x0;
  std::uint64_t seed = 0;
  double reference_tol = 1e-8;
  std::string output;
  Json source;

  explicit ExperimentConfig(Problem p) : problem(std::move(p)) {}

  /// Starting positions: explicit rows, or drawn from `seed`.
  AgentMatrix initial_positions() const {
    return x0 ? *x0 : dcpf::initial_positions(problem.set, problem.agents(), seed);
  }

  /// The configuration with every default and the effective seed filled in.
  Json resolved() const;
};

struct BenchConfig {
  std::string name;
  std::vector<Index> dims;
  std::string set_kind = "box_vs_polytope";
  double radius = 2.0;
  int repeats = 20;
  std::uint64_t seed = 0;
  std::string output;
};

namespace config_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

inline double number_or(const Json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

inline long integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(where, "expected an integer");
  return j.get<long>();
}

inline std::string string(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

inline Vector vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Index>(k)) = number(j[k], where);
  return v;
}

inline Matrix matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Vector first = vector(j[0], where);
  Matrix m(rows, first.size());
  for (Index r = 0; r < rows; ++r) {
    const Vector row = vector(j[static_cast<std::size_t>(r)], where);
    if (row.size() != first.size()) fail(where, "rows have different lengths");
    m.row(r) = row.transpose();
  }
  return m;
}

inline void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) fail(where, "unknown field '" + key + "'");
  }
}

inline Digraph parse_graph(const Json& j) {
  const std::string where = "graph";
  if (!j.is_object()) fail(where, "expected an object");
  if (j.contains("adjacency")) return Digraph(matrix(j.at("adjacency"), where + ".adjacency"));
  const std::string kind_name = string(require(j, "kind", where), where + ".kind");
  const auto kind = parse_topology(kind_name);
  if (!kind) fail(where, "unknown topology '" + kind_name + "'");
  return make_topology(*kind, integer(require(j, "n_agents", where), where + ".n_agents"),
                       number_or(j, "weight", 1.0, where));
}

inline Objective parse_objective(const Json& j) {
  const std::string where = "objective";
  const std::string type = string(require(j, "type", where), where + ".type");
  if (type == "fig1") return fig1_instance().objective;
  if (type == "random") {
    return random_instance(integer(require(j, "n_agents", where), where + ".n_agents"),
                           integer(require(j, "dim", where), where + ".dim"),
                           static_cast<std::uint64_t>(integer(require(j, "seed", where), where + ".seed")),
                           number_or(j, "conditioning", 1.0, where));
  }
  if (type == "explicit") {
    const Json& list = require(j, "costs", where);
    if (!list.is_array() || list.empty()) fail(where, "costs must be a nonempty array");
    std::vector<QuadraticCost> costs;
    for (const Json& c : list) {
      costs.emplace_back(matrix(require(c, "Q", where), where + ".Q"), vector(require(c, "b", where), where + ".b"),
                         number_or(c, "c", 0.0, where));
    }
    return Objective(std::move(costs));
  }
  fail(where, "unknown objective type '" + type + "'");
}

inline FeasibleSet parse_set(const Json& j, Index default_dim) {
  const std::string where = "set";
  const std::string type = string(require(j, "type", where), where + ".type");
  const Index dim = j.contains("dim") ? integer(j.at("dim"), where + ".dim") : default_dim;
  if (type == "box") {
    auto bound = [&](const char* key) -> Vector {
      const Json& b = require(j, key, where);
      return b.is_array() ? vector(b, where + "." + key) : Vector::Constant(dim, number(b, where + "." + key));
    };
    return FeasibleSet::box(bound("lower"), bound("upper"));
  }
  if (type == "simplex") return FeasibleSet::simplex(dim, number(require(j, "radius", where), where + ".radius"));
  if (type == "l1ball") return FeasibleSet::l1_ball(dim, number(require(j, "radius", where), where + ".radius"));
  if (type == "polytope") return FeasibleSet::polytope(matrix(require(j, "vertices", where), where + ".vertices"));
  fail(where, "unknown set type '" + type + "'");
}

inline Schedule parse_schedule(const Json& j, const std::string& where) {
  const std::string name = j.contains("kind") ? string(j.at("kind"), where + ".kind") : "inverse_linear";
  const auto kind = parse_schedule_kind(name);
  if (!kind) fail(where, "unknown schedule kind '" + name + "'");
  const double t0 = number_or(j, "t0", 1.0, where);
  if (*kind == Schedule::Kind::inverse_linear) return Schedule::inverse_linear(t0);
  return Schedule::inverse_power(t0, number_or(j, "p", 1.0, where));
}

inline Json schedule_json(const Schedule& s) {
  Json j{{"kind", std::string(to_string(s.kind()))}, {"t0", s.t0()}};
  if (s.kind() == Schedule::Kind::inverse_power) j["p"] = s.power();
  return j;
}

}  // namespace config_detail

inline Json ExperimentConfig::resolved() const {
  using config_detail::schedule_json;
  Json j = source;
  j["name"] = name;
  j["seed"] = seed;
  j["reference_tol"] = reference_tol;
  j["output"] = output;
  j.erase("algorithm");
  j["algorithms"] = Json::array();
  for (Algorithm a : algorithms) j["algorithms"].push_back(std::string(to_string(a)));
  j["schedule"] = schedule_json(schedule);
  j["integrator"] = {{"method", std::string(to_string(integrator.method))},
                     {"h", integrator.step},
                     {"T", integrator.horizon},
                     {"record_every", integrator.record_every},
                     {"exact_feasibility", integrator.exact_feasibility}};
  j["discrete"] = {{"delta", discrete.delta},
                   {"n_iters", discrete.n_iters},
                   {"record_every", discrete.record_every},
                   {"schedule", schedule_json(discrete.schedule)}};
  j["projected"] = {{"h", projected.step},
                    {"alpha", projected.alpha},
                    {"T", projected.horizon},
                    {"record_every", projected.record_every}};
  return j;
}

/// Builds and validates an experiment; throws ConfigError, AssumptionError or
/// DimensionError before any run starts.
inline ExperimentConfig parse_experiment(const Json& j, std::optional<std::uint64_t> seed_override = std::nullopt) {
  using namespace config_detail;
  reject_unknown(j,
                 {"name", "algorithm", "algorithms", "seed", "graph", "objective", "set", "schedule", "integrator",
                  "discrete", "projected", "init", "reference_tol", "output", "description"},
                 "config");
  Digraph graph = parse_graph(require(j, "graph", "config"));
  Objective objective = parse_objective(require(j, "objective", "config"));
  FeasibleSet set = parse_set(require(j, "set", "config"), objective.dim());
  ExperimentConfig cfg(Problem{std::move(graph), std::move(objective), std::move(set)});
  cfg.name = j.contains("name") ? string(j.at("name"), "name") : "experiment";
  cfg.source = j;

  if (j.contains("algorithm") && j.contains("algorithms")) fail("config", "give either 'algorithm' or 'algorithms'");
  std::vector<std::string> names;
  if (j.contains("algorithm")) {
    names.push_back(string(j.at("algorithm"), "algorithm"));
  } else if (j.contains("algorithms")) {
    if (!j.at("algorithms").is_array()) fail("algorithms", "expected an array");
    for (const Json& a : j.at("algorithms")) names.push_back(string(a, "algorithms"));
  } else {
    names.emplace_back("cg_ode");
  }
  for (const auto& n : names) {
    const auto a = parse_algorithm(n);
    if (!a) fail("algorithm", "unknown algorithm '" + n + "'");
    cfg.algorithms.push_back(*a);
  }

  if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"), "schedule");
  if (j.contains("integrator")) {
    const Json& in = j.at("integrator");
    reject_unknown(in, {"method", "h", "T", "record_every", "exact_feasibility"}, "integrator");
    const std::string method = in.contains("method") ? string(in.at("method"), "integrator.method") : "euler";
    if (method != "euler" && method != "rk4") fail("integrator.method", "expected 'euler' or 'rk4'");
    cfg.integrator.method = method == "euler" ? Method::euler : Method::rk4;
    cfg.integrator.step = number_or(in, "h", cfg.integrator.step, "integrator");
    cfg.integrator.horizon = number_or(in, "T", cfg.integrator.horizon, "integrator");
    cfg.integrator.record_every = number_or(in, "record_every", cfg.integrator.record_every, "integrator");
    if (in.contains("exact_feasibility")) {
      if (!in.at("exact_feasibility").is_boolean()) fail("integrator.exact_feasibility", "expected a boolean");
      cfg.integrator.exact_feasibility = in.at("exact_feasibility").get<bool>();
    }
  }
  if (j.contains("discrete")) {
    const Json& d = j.at("discrete");
    reject_unknown(d, {"delta", "n_iters", "record_every", "schedule"}, "discrete");
    cfg.discrete.delta = number_or(d, "delta", cfg.discrete.delta, "discrete");
    if (d.contains("n_iters")) cfg.discrete.n_iters = integer(d.at("n_iters"), "discrete.n_iters");
    if (d.contains("record_every")) cfg.discrete.record_every = integer(d.at("record_every"), "discrete.record_every");
    if (d.contains("schedule")) cfg.discrete.schedule = parse_schedule(d.at("schedule"), "discrete.schedule");
  }
  if (j.contains("projected")) {
    const Json& p = j.at("projected");
    reject_unknown(p, {"h", "alpha", "T", "record_every"}, "projected");
    cfg.projected.step = number_or(p, "h", cfg.projected.step, "projected");
    cfg.projected.alpha = number_or(p, "alpha", cfg.projected.alpha, "projected");
    cfg.projected.horizon = number_or(p, "T", cfg.projected.horizon, "projected");
    cfg.projected.record_every = number_or(p, "record_every", cfg.projected.record_every, "projected");
  }

  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(integer(j.at("seed"), "seed"));
  if (j.contains("init")) {
    const Json& init = j.at("init");
    reject_unknown(init, {"seed", "x0"}, "init");
    if (init.contains("x0")) {
      const Matrix x0 = matrix(init.at("x0"), "init.x0");
      cfg.x0 = AgentMatrix(x0);
    } else if (init.contains("seed")) {
      cfg.seed = static_cast<std::uint64_t>(integer(init.at("seed"), "init.seed"));
    }
  }
  if (seed_override) cfg.seed = *seed_override;
  cfg.reference_tol = number_or(j, "reference_tol", cfg.reference_tol, "config");
  cfg.output = j.contains("output") ? string(j.at("output"), "output") : cfg.name + ".csv";

  // Everything below must hold before any run starts.
  cfg.problem.validate();
  cfg.integrator.validate();
  cfg.discrete.validate();
  cfg.projected.validate();
  if (!(cfg.reference_tol > 0.0)) fail("reference_tol", "must be positive");
  validate_initial_positions(cfg.problem, cfg.initial_positions());
  for (Algorithm a : cfg.algorithms) {
    if (a == Algorithm::cg_ode && cfg.integrator.method == Method::euler && cfg.integrator.exact_feasibility &&
        cfg.integrator.step > max_feasible_step(cfg.problem.graph, cfg.schedule) * (1.0 + 1e-12)) {
      fail("integrator.h", "Euler step exceeds the feasibility bound 1/(d_max + beta(0)) = " +
                               format_double(max_feasible_step(cfg.problem.graph, cfg.schedule)));
    }
  }
  return cfg;
}

inline Json load_json(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

inline ExperimentConfig load_experiment(const std::string& path, std::optional<std::uint64_t> seed_override = {}) {
  return parse_experiment(load_json(path), seed_override);
}

inline BenchConfig parse_bench(const Json& j) {
  using namespace config_detail;
  reject_unknown(j, {"name", "dims", "set_kind", "radius", "repeats", "seed", "output", "description"}, "bench");
  BenchConfig cfg;
  cfg.name = j.contains("name") ? string(j.at("name"), "name") : "bench";
  const Json& dims = require(j, "dims", "bench");
  if (!dims.is_array() || dims.empty()) fail("bench.dims", "expected a nonempty array of dimensions");
  for (const Json& d : dims) {
    const long n = integer(d, "bench.dims");
    if (n < 1) fail("bench.dims", "dimensions must be positive");
    cfg.dims.push_back(n);
  }
  if (j.contains("set_kind")) cfg.set_kind = string(j.at("set_kind"), "bench.set_kind");
  static const std::set<std::string> kinds{"box", "simplex", "l1ball", "polytope", "box_vs_polytope"};
  if (!kinds.count(cfg.set_kind)) fail("bench.set_kind", "unknown set family '" + cfg.set_kind + "'");
  cfg.radius = number_or(j, "radius", cfg.radius, "bench");
  if (!(cfg.radius > 0.0)) fail("bench.radius", "must be positive");
  if (j.contains("repeats")) cfg.repeats = static_cast<int>(integer(j.at("repeats"), "bench.repeats"));
  if (cfg.repeats < kMinTimingRepeats) {
    fail("bench.repeats", "must be at least " + std::to_string(kMinTimingRepeats));
  }
  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(integer(j.at("seed"), "bench.seed"));
  cfg.output = j.contains("output") ? string(j.at("output"), "bench.output") : cfg.name + "_timing.csv";
  return cfg;
}

}  // namespace dcpf
