#pragma once

// Comparison algorithms:
//  - cg_discrete: the dynamics discretized with mixing step delta and
//    gradient tracking on z;
//  - defw: decentralized Frank-Wolfe, z from neighbour-averaged gradients
//    evaluated at neighbour-averaged iterates;
//  - projected: Euler steps of the projected gradient-tracking dynamics
//    x' = P(x - alpha (L x + z)) - x, y' = -L z.

#include <string>
#include <utility>

#include "dcpf/dynamics.hpp"

namespace dcpf {

struct DiscreteConfig {
  double delta = 0.5;
  Schedule schedule = Schedule::inverse_linear(1.0);
  long n_iters = 2000;
  long record_every = 10;

  /// eta^k = delta * beta^k.
  double eta(long k) const { return delta * schedule(static_cast<double>(k)); }

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (n_iters < 1 || record_every < 1) throw ConfigError("n_iters and record_every must be positive");
    if (!(eta(0) > 0.0 && eta(0) < 1.0)) throw ConfigError("eta^0 = delta * beta^0 must lie in (0, 1)");
  }
};

struct ProjectedConfig {
  double step = 0.1;
  double alpha = 1.0;
  double horizon = 100.0;
  double record_every = 1.0;

  void validate() const {
    if (!(step > 0.0 && step <= 1.0)) throw ConfigError("projected step must lie in (0, 1]");
    if (!(alpha > 0.0)) throw ConfigError("projected alpha must be positive");
    if (!(horizon > 0.0) || !(record_every > 0.0)) throw ConfigError("projected horizon and record_every must be positive");
  }
};

/// Rescales a symmetric regular graph to weights 1/deg, so that
/// (1 - delta) I + delta A is symmetric doubly stochastic.
inline Digraph doubly_stochastic(const Digraph& g) {
  const Matrix& adj = g.adjacency();
  const Index n = g.size();
  Matrix out = Matrix::Zero(n, n);
  Index degree = -1;
  for (Index i = 0; i < n; ++i) {
    Index count = 0;
    for (Index j = 0; j < n; ++j) {
      if ((adj(i, j) > 0.0) != (adj(j, i) > 0.0)) throw AssumptionError("mixing needs an undirected graph");
      if (adj(i, j) > 0.0) ++count;
    }
    if (degree >= 0 && count != degree) throw AssumptionError("uniform 1/deg mixing needs a regular graph");
    degree = count;
  }
  if (degree <= 0) throw AssumptionError("mixing needs a graph with edges");
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (adj(i, j) > 0.0) out(i, j) = 1.0 / static_cast<double>(degree);
    }
  }
  return Digraph(std::move(out));
}

/// Throws unless the adjacency is symmetric with unit row sums.
inline void validate_mixing(const Digraph& g) {
  const Matrix& adj = g.adjacency();
  if ((adj - adj.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      ((adj.rowwise().sum().array() - 1.0).abs() > 1e-9).any()) {
    throw AssumptionError("adjacency is not symmetric doubly stochastic");
  }
}

/// Avg_i{m} = (1 - delta) m_i + delta sum_j a_ij m_j, row-wise.
inline AgentMatrix neighbor_average(const Digraph& g, double delta, const AgentMatrix& m) {
  AgentMatrix out = (1.0 - delta) * m;
  out.noalias() += delta * (g.adjacency() * m);
  return out;
}

struct DiscreteIterate {
  AgentMatrix x;
  AgentMatrix z;
};

namespace detail {

inline void check_iterate(const AgentMatrix& m, const Problem& p, const char* what) {
  if (m.rows() != p.agents()) throw DimensionError(std::string(what) + ": one row per agent expected");
  require_dim(m.cols(), p.dim(), what);
}

// grad_x caches G(x) and is advanced to G(x+).
inline DiscreteIterate discretized_cg_step(const AgentMatrix& x, const AgentMatrix& z, AgentMatrix& grad_x,
                                           const Problem& p, long k, const DiscreteConfig& cfg,
                                           SubproblemClock* clock) {
  const AgentMatrix v = lmo_rows(z, p.set, clock);
  const double eta = cfg.eta(k);
  DiscreteIterate next;
  next.x = neighbor_average(p.graph, cfg.delta, x) + eta * (v - x);
  AgentMatrix grad_next = p.objective.stacked_grad(next.x);
  next.z = neighbor_average(p.graph, cfg.delta, z) + grad_next - grad_x;
  grad_x = std::move(grad_next);
  return next;
}

/// z_i = Avg_i{ grad f_j(Avg_j{x}) }.
inline AgentMatrix defw_direction(const AgentMatrix& x, const Problem& p, double delta) {
  return neighbor_average(p.graph, delta, p.objective.stacked_grad(neighbor_average(p.graph, delta, x)));
}

inline AgentMatrix defw_step(const AgentMatrix& x, const Problem& p, long k, const DiscreteConfig& cfg,
                             SubproblemClock* clock) {
  const AgentMatrix averaged = neighbor_average(p.graph, cfg.delta, x);
  const AgentMatrix z = neighbor_average(p.graph, cfg.delta, p.objective.stacked_grad(averaged));
  const AgentMatrix v = lmo_rows(z, p.set, clock);
  return averaged + cfg.eta(k) * (v - averaged);
}

inline std::pair<AgentMatrix, AgentMatrix> projected_step(const AgentMatrix& x, const AgentMatrix& y, const Problem& p,
                                                          double h, double alpha, SubproblemClock* clock) {
  const Matrix lap = laplacian(p.graph);
  const AgentMatrix z = y + p.objective.stacked_grad(x);
  const AgentMatrix target = x - alpha * (lap * x + z);
  AgentMatrix projected(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    if (clock) {
      projected.row(i) = clock->measure([&] { return project(p.set, target.row(i).transpose()); }).transpose();
    } else {
      projected.row(i) = project(p.set, target.row(i).transpose()).transpose();
    }
  }
  return {(1.0 - h) * x + h * projected, y - h * (lap * z)};
}

}  // namespace detail

/// One iteration of the discretized dynamics; z^0 must be G(x^0).
inline DiscreteIterate discretized_cg_step(const AgentMatrix& x, const AgentMatrix& z, const Problem& problem, long k,
                                           const DiscreteConfig& cfg) {
  cfg.validate();
  problem.check_shapes();
  validate_mixing(problem.graph);
  detail::check_iterate(x, problem, "discretized_cg_step x");
  detail::check_iterate(z, problem, "discretized_cg_step z");
  AgentMatrix grad_x = problem.objective.stacked_grad(x);
  return detail::discretized_cg_step(x, z, grad_x, problem, k, cfg, nullptr);
}

inline AgentMatrix defw_step(const AgentMatrix& x, const Problem& problem, long k, const DiscreteConfig& cfg) {
  cfg.validate();
  problem.check_shapes();
  validate_mixing(problem.graph);
  detail::check_iterate(x, problem, "defw_step x");
  return detail::defw_step(x, problem, k, cfg, nullptr);
}

inline std::pair<AgentMatrix, AgentMatrix> projected_dynamics_step(const AgentMatrix& x, const AgentMatrix& y,
                                                                   const Problem& problem, double h, double alpha) {
  if (!(h > 0.0) || !(alpha > 0.0)) throw ConfigError("projected step and alpha must be positive");
  problem.check_shapes();
  detail::check_iterate(x, problem, "projected_dynamics_step x");
  detail::check_iterate(y, problem, "projected_dynamics_step y");
  return detail::projected_step(x, y, problem, h, alpha, nullptr);
}

namespace detail {

struct WallClock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); }
};

inline void prepare_discrete(const Problem& problem, const DiscreteConfig& cfg, const AgentMatrix& x0) {
  problem.check_shapes();
  validate_mixing(problem.graph);
  cfg.validate();
  validate_initial_positions(problem, x0);
}

}  // namespace detail

/// Runs cg_discrete for cfg.n_iters iterations. `observer` sees (x, y = z - G(x)).
inline RunRecord run_cg_discrete(const Problem& problem, const DiscreteConfig& cfg, const AgentMatrix& x0,
                                 const ReferenceSolution& reference, const StateObserver& observer = {}) {
  detail::prepare_discrete(problem, cfg, x0);
  detail::WallClock wall;
  RunRecord rec;
  SubproblemClock clock;
  AgentMatrix grad_x = problem.objective.stacked_grad(x0);
  DiscreteIterate it{x0, grad_x};
  auto sample = [&](long k) {
    const AgentMatrix y = it.z - grad_x;
    detail::record_sample(rec, it.x, y, problem, reference.value, static_cast<double>(k), k, wall.seconds());
    if (observer) observer(NetworkState{it.x, y, static_cast<double>(k)});
  };
  sample(0);
  for (long k = 0; k < cfg.n_iters; ++k) {
    it = detail::discretized_cg_step(it.x, it.z, grad_x, problem, k, cfg, &clock);
    detail::require_finite(it.x, it.z, static_cast<double>(k + 1));
    if ((k + 1) % cfg.record_every == 0 || k + 1 == cfg.n_iters) {
      sample(k + 1);
      rec.subproblem_timings.push_back({Subproblem::lmo, clock.mean_ns()});
      clock.reset();
    }
  }
  return rec;
}

/// Runs defw for cfg.n_iters iterations. `observer` sees (x, y = z - G(x))
/// with z the direction the next iteration would use.
inline RunRecord run_defw(const Problem& problem, const DiscreteConfig& cfg, const AgentMatrix& x0,
                          const ReferenceSolution& reference, const StateObserver& observer = {}) {
  detail::prepare_discrete(problem, cfg, x0);
  detail::WallClock wall;
  RunRecord rec;
  SubproblemClock clock;
  AgentMatrix x = x0;
  auto sample = [&](long k) {
    const AgentMatrix y = detail::defw_direction(x, problem, cfg.delta) - problem.objective.stacked_grad(x);
    detail::record_sample(rec, x, y, problem, reference.value, static_cast<double>(k), k, wall.seconds());
    if (observer) observer(NetworkState{x, y, static_cast<double>(k)});
  };
  sample(0);
  for (long k = 0; k < cfg.n_iters; ++k) {
    x = detail::defw_step(x, problem, k, cfg, &clock);
    detail::require_finite(x, x, static_cast<double>(k + 1));
    if ((k + 1) % cfg.record_every == 0 || k + 1 == cfg.n_iters) {
      sample(k + 1);
      rec.subproblem_timings.push_back({Subproblem::lmo, clock.mean_ns()});
      clock.reset();
    }
  }
  return rec;
}

/// Integrates the projected gradient-tracking dynamics from (x0, y = 0).
inline RunRecord run_projected(const Problem& problem, const ProjectedConfig& cfg, const AgentMatrix& x0,
                               const ReferenceSolution& reference, const StateObserver& observer = {}) {
  problem.validate();
  cfg.validate();
  validate_initial_positions(problem, x0);
  detail::WallClock wall;
  RunRecord rec;
  SubproblemClock clock;
  const long steps = std::max(1L, std::lround(cfg.horizon / cfg.step));
  const long every = detail::stride(cfg.record_every, cfg.step);
  AgentMatrix x = x0;
  AgentMatrix y = AgentMatrix::Zero(x0.rows(), x0.cols());
  detail::record_sample(rec, x, y, problem, reference.value, 0.0, 0, wall.seconds());
  if (observer) observer(NetworkState{x, y, 0.0});
  for (long k = 1; k <= steps; ++k) {
    std::tie(x, y) = detail::projected_step(x, y, problem, cfg.step, cfg.alpha, &clock);
    const double t = static_cast<double>(k) * cfg.step;
    detail::require_finite(x, y, t);
    if (k % every == 0 || k == steps) {
      detail::record_sample(rec, x, y, problem, reference.value, t, k, wall.seconds());
      rec.subproblem_timings.push_back({Subproblem::projection, clock.mean_ns()});
      clock.reset();
      if (observer) observer(NetworkState{x, y, t});
    }
  }
  return rec;
}

}  // namespace dcpf
