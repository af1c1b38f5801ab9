#pragma once

// Convergence diagnostics, the centralized reference solution and subproblem
// timing.

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "dcpf/error.hpp"
#include "dcpf/feasible_set.hpp"
#include "dcpf/objective.hpp"
#include "dcpf/run_record.hpp"
#include "dcpf/types.hpp"

namespace dcpf {

inline Vector row_mean(const AgentMatrix& x) { return x.colwise().mean().transpose(); }

/// ||x - 1 xbar^T||_F.
inline double consensus_error(const AgentMatrix& x) {
  if (x.rows() == 0) return 0.0;
  return (x.rowwise() - x.colwise().mean()).norm();
}

/// ||W|| with W_i = y_i + grad f_i(x_i) - (1/N) sum_j grad f_j(x_j).
inline double tracking_error(const AgentMatrix& x, const AgentMatrix& y, const Objective& obj) {
  if (y.rows() != x.rows() || y.cols() != x.cols()) throw DimensionError("tracking error: x and y shapes differ");
  const AgentMatrix grads = obj.stacked_grad(x);
  const AgentMatrix z = y + grads;
  return (z.rowwise() - grads.colwise().mean()).norm();
}

/// grad F(xbar)^T (xbar - lmo(grad F(xbar))).
inline double fw_gap(const VectorRef& xbar, const Objective& obj, const FeasibleSet& set) {
  const Vector g = obj.global_grad(xbar);
  return g.dot(xbar - lmo(set, g));
}

struct ReferenceSolution {
  Vector minimizer;
  double value = 0.0;
  double fw_gap = 0.0;
  long iterations = 0;
};

namespace detail {

/// Exact line-search step along d for the quadratic F, capped at max_step.
/// Moves x and its gradient g along d.
inline double line_step(const Objective& obj, Vector& x, Vector& g, const Vector& d, double max_step) {
  const Vector hd = obj.mean_hessian() * d;
  const double curvature = d.dot(hd);
  const double step = curvature > 0.0 ? std::min(max_step, -g.dot(d) / curvature) : max_step;
  x += step * d;
  g += step * hd;
  return step;
}

/// Away vertex of a box: the maximizer of g^T v over the smallest face
/// containing x. Also returns the largest away step and the coordinate that
/// reaches its bound there.
inline std::tuple<Vector, double, Index> box_away(const Box& box, const Vector& x, const Vector& g) {
  Vector a = x;
  double max_step = std::numeric_limits<double>::infinity();
  Index blocking = -1;
  for (Index k = 0; k < x.size(); ++k) {
    const double lo = box.lower(k), hi = box.upper(k);
    if (x(k) == lo || x(k) == hi || g(k) == 0.0) continue;
    a(k) = g(k) > 0.0 ? hi : lo;
    const double room = g(k) > 0.0 ? (x(k) - lo) / (hi - x(k)) : (hi - x(k)) / (x(k) - lo);
    if (room < max_step) {
      max_step = room;
      blocking = k;
    }
  }
  return {a, max_step, blocking};
}

}  // namespace detail

/// Centralized away-step Frank-Wolfe on F with exact line search (closed form
/// for quadratics), stopped once the Frank-Wolfe gap is at most `tol`. Boxes
/// take away steps within the face containing the iterate; other sets keep the
/// iterate as a convex combination of the LMO vertices seen so far.
inline ReferenceSolution reference_solution(const Objective& obj, const FeasibleSet& set, double tol = 1e-8,
                                            long max_iter = 10'000'000) {
  require_dim(obj.dim(), set.dim(), "reference solution");
  if (!(tol > 0.0)) throw ConfigError("reference tolerance must be positive");
  const Box* box = std::get_if<Box>(&set.variant());
  std::vector<Vector> active{lmo(set, Vector::Zero(set.dim()))};
  std::vector<double> weight{1.0};
  Vector x = active.front();
  Vector g = obj.global_grad(x);
  for (long k = 0; k <= max_iter; ++k) {
    if (k % 1000 == 0) g = obj.global_grad(x);
    Vector s = lmo(set, g);
    double gap = g.dot(x - s);
    if (gap <= tol) {
      g = obj.global_grad(x);
      s = lmo(set, g);
      gap = g.dot(x - s);
      if (gap <= tol) return {x, obj.global_eval(x), gap, k};
    }

    if (box) {
      const auto [a, max_step, blocking] = detail::box_away(*box, x, g);
      if (gap >= g.dot(a - x)) {
        if (detail::line_step(obj, x, g, s - x, 1.0) >= 1.0) x = s;
      } else if (detail::line_step(obj, x, g, x - a, max_step) >= max_step) {
        x(blocking) = a(blocking) == box->upper(blocking) ? box->lower(blocking) : box->upper(blocking);
      }
      continue;
    }

    std::size_t away = 0;
    for (std::size_t j = 1; j < active.size(); ++j) {
      if (g.dot(active[j]) > g.dot(active[away])) away = j;
    }
    if (gap >= g.dot(active[away] - x)) {
      const double step = detail::line_step(obj, x, g, s - x, 1.0);
      for (double& w : weight) w *= 1.0 - step;
      const auto it = std::find(active.begin(), active.end(), s);
      if (step >= 1.0) {
        x = s;
        active.assign(1, s);
        weight.assign(1, 1.0);
      } else if (it == active.end()) {
        active.push_back(s);
        weight.push_back(step);
      } else {
        weight[static_cast<std::size_t>(it - active.begin())] += step;
      }
    } else {
      const double max_step = weight[away] / (1.0 - weight[away]);
      const double step = detail::line_step(obj, x, g, Vector(x - active[away]), max_step);
      for (double& w : weight) w *= 1.0 + step;
      weight[away] -= step;
      if (step >= max_step) {
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(away));
        weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(away));
      }
    }
  }
  throw NumericError("reference solution: Frank-Wolfe gap above tolerance after " + std::to_string(max_iter) +
                     " iterations");
}

/// F(xbar) - F*, clamped to zero within 1e-9 of it.
inline double optimality_gap(const AgentMatrix& x, const Objective& obj, double fstar) {
  const double gap = obj.global_eval(row_mean(x)) - fstar;
  if (gap < -1e-6) {
    throw NumericError("optimality gap " + format_double(gap) + " is negative: reference solution is not optimal");
  }
  return gap < 0.0 && gap >= -1e-9 ? 0.0 : gap;
}

struct TimingResult {
  double mean_ns = 0.0;
  double median_ns = 0.0;
};

inline constexpr int kMinTimingRepeats = 10;

/// Mean and median wall time of one LMO or projection call on a monotonic
/// clock. The first 10% of the repeats are warm-up and discarded.
inline TimingResult time_subproblem(Subproblem kind, const FeasibleSet& set, const VectorRef& probe, int repeats) {
  if (repeats < kMinTimingRepeats) {
    throw ConfigError("timing needs at least " + std::to_string(kMinTimingRepeats) + " repeats");
  }
  require_dim(probe.size(), set.dim(), "time_subproblem");
  using Clock = std::chrono::steady_clock;
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(repeats));
  volatile double sink = 0.0;
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    const Vector out = kind == Subproblem::lmo ? lmo(set, probe) : project(set, probe);
    const auto stop = Clock::now();
    sink = sink + out(0);
    samples.push_back(static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()));
  }
  samples.erase(samples.begin(), samples.begin() + repeats / 10);
  TimingResult result;
  for (double s : samples) result.mean_ns += s;
  result.mean_ns /= static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  result.median_ns = samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  result.mean_ns = std::max(result.mean_ns, 1.0);
  result.median_ns = std::max(result.median_ns, 1.0);
  return result;
}

/// Time profiles for the scalar comparison ODE s' = -gamma s + gamma eps.
enum class Profile { zero, constant, inverse_linear, exponential };

inline double evaluate(Profile p, double t) {
  switch (p) {
    case Profile::zero: return 0.0;
    case Profile::constant: return 1.0;
    case Profile::inverse_linear: return 1.0 / (1.0 + t);
    case Profile::exponential: return std::exp(-t);
  }
  return 0.0;
}

/// Euler integration of s' = -gamma(t) s + gamma(t) eps(t) from s(0) = s0;
/// returns s(T). gamma must have a divergent integral, eps must vanish.
inline double lemma2_numeric_check(Profile gamma, Profile epsilon, double s0, double horizon, double step = 1e-3) {
  if (gamma != Profile::constant && gamma != Profile::inverse_linear) {
    throw ConfigError("gamma must be positive with divergent integral (constant or inverse_linear)");
  }
  if (epsilon == Profile::constant) throw ConfigError("epsilon must vanish (zero, inverse_linear or exponential)");
  if (!(horizon > 0.0) || !(step > 0.0)) throw ConfigError("horizon and step must be positive");
  const long steps = std::lround(horizon / step);
  double s = s0;
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * step;
    const double g = evaluate(gamma, t);
    s += step * g * (evaluate(epsilon, t) - s);
  }
  return s;
}

}  // namespace dcpf
