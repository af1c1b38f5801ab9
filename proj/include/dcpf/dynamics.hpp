#pragma once

// Distributed projection-free dynamics over a weight-balanced digraph:
//
//   x_i' = sum_j a_ij (x_j - x_i) + beta(t) (v_i - x_i)
//   y_i' = sum_j a_ij (z_j - z_i)
//   z_i  = y_i + grad f_i(x_i),   v_i = lmo(z_i)
//
// State is (x, y); z and v are recomputed from it at every evaluation.

#include <chrono>
#include <functional>
#include <string>

#include "dcpf/error.hpp"
#include "dcpf/feasible_set.hpp"
#include "dcpf/graph.hpp"
#include "dcpf/metrics.hpp"
#include "dcpf/objective.hpp"
#include "dcpf/run_record.hpp"
#include "dcpf/schedule.hpp"

namespace dcpf {

inline constexpr double kFeasibilityTol = 1e-9;

/// Communication graph, local costs and constraint set of one experiment.
struct Problem {
  Digraph graph;
  Objective objective;
  FeasibleSet set;

  Index agents() const { return graph.size(); }
  Index dim() const { return set.dim(); }

  void check_shapes() const {
    if (objective.agents() != graph.size()) {
      throw DimensionError("objective has " + std::to_string(objective.agents()) + " costs but graph has " +
                           std::to_string(graph.size()) + " agents");
    }
    require_dim(objective.dim(), set.dim(), "objective vs feasible set");
  }

  /// Shapes plus the graph assumptions (balanced, strongly connected).
  void validate() const {
    check_shapes();
    validate_graph_assumptions(graph);
  }
};

/// Throws unless every row of x0 is a feasible starting point.
inline void validate_initial_positions(const Problem& problem, const AgentMatrix& x0) {
  if (x0.rows() != problem.agents()) throw DimensionError("initial positions: one row per agent expected");
  require_dim(x0.cols(), problem.dim(), "initial positions");
  for (Index i = 0; i < x0.rows(); ++i) {
    if (!contains(problem.set, x0.row(i).transpose(), kFeasibilityTol)) {
      throw AssumptionError("initial position of agent " + std::to_string(i) + " is outside the feasible set");
    }
  }
}

/// Agent i starts at sample_point(set, mix_seed(seed, i)).
inline AgentMatrix initial_positions(const FeasibleSet& set, Index n_agents, std::uint64_t seed) {
  AgentMatrix x0(n_agents, set.dim());
  for (Index i = 0; i < n_agents; ++i) {
    x0.row(i) = sample_point(set, mix_seed(seed, static_cast<std::uint64_t>(i))).transpose();
  }
  return x0;
}

struct NetworkState {
  AgentMatrix x;
  AgentMatrix y;
  double t = 0.0;
};

struct StateDerivative {
  AgentMatrix dx;
  AgentMatrix dy;
};

enum class Method { euler, rk4 };

inline std::string_view to_string(Method m) { return m == Method::euler ? "euler" : "rk4"; }

struct IntegratorConfig {
  Method method = Method::euler;
  double step = 0.05;
  double horizon = 200.0;
  double record_every = 1.0;
  /// Enforce the Euler step bound that keeps every iterate a convex
  /// combination of feasible points.
  bool exact_feasibility = true;

  void validate() const {
    if (!(step > 0.0) || !(horizon > 0.0) || !(record_every > 0.0)) {
      throw ConfigError("integrator step, horizon and record_every must be positive");
    }
    if (step > horizon) throw ConfigError("integrator step exceeds the horizon");
  }
};

/// Largest Euler step for which x+ is a convex combination of x_i, x_j, v_i:
/// 1 / (d_max + beta(0)).
inline double max_feasible_step(const Digraph& g, const Schedule& sched) { return 1.0 / (max_degree(g) + sched(0.0)); }

/// Accumulates time spent inside LMO or projection calls.
struct SubproblemClock {
  double total_ns = 0.0;
  long calls = 0;

  template <class F>
  auto measure(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto out = f();
    total_ns += static_cast<double>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
    ++calls;
    return out;
  }

  double mean_ns() const { return calls ? total_ns / static_cast<double>(calls) : 0.0; }
  void reset() { *this = {}; }
};

namespace detail {

inline void check_state(const NetworkState& s, const Problem& p) {
  if (s.x.rows() != p.agents() || s.y.rows() != p.agents()) throw DimensionError("state: one row per agent expected");
  require_dim(s.x.cols(), p.dim(), "state x");
  require_dim(s.y.cols(), p.dim(), "state y");
}

/// Rows lmo(z_i).
inline AgentMatrix lmo_rows(const AgentMatrix& z, const FeasibleSet& set, SubproblemClock* clock) {
  AgentMatrix v(z.rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    if (clock) {
      v.row(i) = clock->measure([&] { return lmo(set, z.row(i).transpose()); }).transpose();
    } else {
      v.row(i) = lmo(set, z.row(i).transpose()).transpose();
    }
  }
  return v;
}

inline StateDerivative rhs(const NetworkState& s, const Problem& p, const Schedule& sched, SubproblemClock* clock,
                           AgentMatrix* v_out = nullptr) {
  const Matrix lap = laplacian(p.graph);
  const AgentMatrix z = s.y + p.objective.stacked_grad(s.x);
  AgentMatrix v = lmo_rows(z, p.set, clock);
  StateDerivative d;
  d.dx = -(lap * s.x) + sched(s.t) * (v - s.x);
  d.dy = -(lap * z);
  if (v_out) *v_out = std::move(v);
  return d;
}

inline NetworkState step(const NetworkState& s, const Problem& p, const Schedule& sched, const IntegratorConfig& cfg,
                         SubproblemClock* clock) {
  const double h = cfg.step;
  NetworkState next;
  next.t = s.t + h;
  if (cfg.method == Method::euler) {
    AgentMatrix v;
    const StateDerivative d = rhs(s, p, sched, clock, &v);
    // x_i+ = (1 - h(d_i + beta)) x_i + h sum_j a_ij x_j + h beta v_i
    const double beta = sched(s.t);
    const Vector degree = p.graph.in_degrees();
    next.x = (1.0 - h * (degree.array() + beta)).matrix().asDiagonal() * s.x;
    next.x.noalias() += h * (p.graph.adjacency() * s.x);
    next.x += (h * beta) * v;
    next.y = s.y + h * d.dy;
    return next;
  }
  auto shifted = [&](const StateDerivative& d, double scale) {
    return NetworkState{s.x + scale * d.dx, s.y + scale * d.dy, s.t + scale};
  };
  const StateDerivative k1 = rhs(s, p, sched, clock);
  const StateDerivative k2 = rhs(shifted(k1, 0.5 * h), p, sched, clock);
  const StateDerivative k3 = rhs(shifted(k2, 0.5 * h), p, sched, clock);
  const StateDerivative k4 = rhs(shifted(k3, h), p, sched, clock);
  next.x = s.x + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  next.y = s.y + (h / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  return next;
}

}  // namespace detail

/// Vector field of the dynamics at `state`. Pure.
inline StateDerivative rhs(const NetworkState& state, const Problem& problem, const Schedule& sched) {
  detail::check_state(state, problem);
  return detail::rhs(state, problem, sched, nullptr);
}

/// One explicit Euler or classical RK4 step; t advances by cfg.step.
inline NetworkState step(const NetworkState& state, const Problem& problem, const Schedule& sched,
                         const IntegratorConfig& cfg) {
  cfg.validate();
  detail::check_state(state, problem);
  if (cfg.method == Method::euler && cfg.exact_feasibility) {
    const double bound = max_feasible_step(problem.graph, sched);
    if (cfg.step > bound * (1.0 + 1e-12)) {
      throw ConfigError("Euler step " + format_double(cfg.step) + " exceeds the feasibility bound " +
                        format_double(bound) + " = 1/(d_max + beta(0))");
    }
  }
  return detail::step(state, problem, sched, cfg, nullptr);
}

using StateObserver = std::function<void(const NetworkState&)>;

namespace detail {

/// Appends the four diagnostics of (x, y) at time t.
inline void record_sample(RunRecord& rec, const AgentMatrix& x, const AgentMatrix& y, const Problem& p, double fstar,
                          double t, long iteration, double wall_seconds) {
  rec.times.push_back(t);
  rec.consensus_err.push_back(consensus_error(x));
  rec.tracking_err.push_back(tracking_error(x, y, p.objective));
  rec.optimality_gap.push_back(optimality_gap(x, p.objective, fstar));
  rec.fw_gap.push_back(fw_gap(row_mean(x), p.objective, p.set));
  rec.iterations.push_back(iteration);
  rec.wall_seconds.push_back(wall_seconds);
}

inline void require_finite(const AgentMatrix& x, const AgentMatrix& y, double t) {
  if (!x.allFinite() || !y.allFinite()) {
    throw NumericError("non-finite state encountered at t = " + format_double(t));
  }
}

/// Number of steps between samples for a sampling period `every` (>= 1).
inline long stride(double every, double step) { return std::max(1L, std::lround(every / step)); }

}  // namespace detail

/// Integrates from (x0, y = 0) to the horizon, sampling the diagnostics every
/// `record_every` time units and at the final time. Graph assumptions and
/// feasibility of x0 are checked once on entry.
inline RunRecord simulate(const Problem& problem, const Schedule& sched, const IntegratorConfig& cfg,
                          const AgentMatrix& x0, const ReferenceSolution& reference,
                          const StateObserver& observer = {}) {
  problem.validate();
  cfg.validate();
  validate_initial_positions(problem, x0);
  if (cfg.method == Method::euler && cfg.exact_feasibility) {
    const double bound = max_feasible_step(problem.graph, sched);
    if (cfg.step > bound * (1.0 + 1e-12)) {
      throw ConfigError("Euler step " + format_double(cfg.step) + " exceeds the feasibility bound " +
                        format_double(bound) + " = 1/(d_max + beta(0))");
    }
  }

  const auto wall_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  };

  const long steps = std::max(1L, std::lround(cfg.horizon / cfg.step));
  const long every = detail::stride(cfg.record_every, cfg.step);
  NetworkState state{x0, AgentMatrix::Zero(x0.rows(), x0.cols()), 0.0};
  RunRecord rec;
  SubproblemClock clock;

  detail::record_sample(rec, state.x, state.y, problem, reference.value, 0.0, 0, elapsed());
  if (observer) observer(state);
  for (long k = 1; k <= steps; ++k) {
    state = detail::step(state, problem, sched, cfg, &clock);
    state.t = static_cast<double>(k) * cfg.step;
    detail::require_finite(state.x, state.y, state.t);
    if (k % every == 0 || k == steps) {
      detail::record_sample(rec, state.x, state.y, problem, reference.value, state.t, k, elapsed());
      rec.subproblem_timings.push_back({Subproblem::lmo, clock.mean_ns()});
      clock.reset();
      if (observer) observer(state);
    }
  }
  return rec;
}

/// As above, drawing x0 from `init_seed` and computing the reference solution.
inline RunRecord simulate(const Problem& problem, const Schedule& sched, const IntegratorConfig& cfg,
                          std::uint64_t init_seed, double reference_tol = 1e-8) {
  problem.check_shapes();
  const ReferenceSolution ref = reference_solution(problem.objective, problem.set, reference_tol);
  return simulate(problem, sched, cfg, initial_positions(problem.set, problem.agents(), init_seed), ref);
}

}  // namespace dcpf
