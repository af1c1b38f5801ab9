#pragma once

// Compact convex constraint sets with a linear minimization oracle, a
// Euclidean projection and a membership test.

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dcpf/error.hpp"
#include "dcpf/types.hpp"

namespace dcpf {

struct Box {
  Vector lower;
  Vector upper;
};

/// {x : x >= 0, sum x = radius}.
struct Simplex {
  Index dim;
  double radius;
};

/// {x : sum |x_k| <= radius}.
struct L1Ball {
  Index dim;
  double radius;
};

/// Convex hull of the rows of `vertices`.
struct VertexPolytope {
  Matrix vertices;
};

class FeasibleSet {
 public:
  using Variant = std::variant<Box, Simplex, L1Ball, VertexPolytope>;

  static FeasibleSet box(Vector lower, Vector upper) {
    if (lower.size() < 1 || lower.size() != upper.size()) {
      throw DimensionError("box bounds must be nonempty and of equal length");
    }
    if (!(lower.array() <= upper.array()).all() || !lower.allFinite() || !upper.allFinite()) {
      throw AssumptionError("box must be nonempty and bounded (lower <= upper, finite)");
    }
    return FeasibleSet(Box{std::move(lower), std::move(upper)});
  }

  static FeasibleSet uniform_box(Index dim, double lower, double upper) {
    if (dim < 1) throw DimensionError("box dimension must be positive");
    return box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
  }

  static FeasibleSet simplex(Index dim, double radius) {
    if (dim < 1) throw DimensionError("simplex dimension must be positive");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw AssumptionError("simplex radius must be positive");
    return FeasibleSet(Simplex{dim, radius});
  }

  static FeasibleSet l1_ball(Index dim, double radius) {
    if (dim < 1) throw DimensionError("l1 ball dimension must be positive");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw AssumptionError("l1 ball radius must be positive");
    return FeasibleSet(L1Ball{dim, radius});
  }

  static FeasibleSet polytope(Matrix vertices) {
    if (vertices.rows() < 1 || vertices.cols() < 1) {
      throw AssumptionError("polytope needs at least one vertex");
    }
    if (!vertices.allFinite()) throw AssumptionError("polytope vertices must be finite");
    return FeasibleSet(VertexPolytope{std::move(vertices)});
  }

  Index dim() const {
    return std::visit(
        [](const auto& s) -> Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) return s.lower.size();
          else if constexpr (std::is_same_v<T, VertexPolytope>) return s.vertices.cols();
          else return s.dim;
        },
        set_);
  }

  std::string_view kind() const {
    static constexpr std::string_view names[] = {"box", "simplex", "l1ball", "polytope"};
    return names[set_.index()];
  }

  const Variant& variant() const noexcept { return set_; }

 private:
  explicit FeasibleSet(Variant set) : set_(std::move(set)) {}

  Variant set_;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Euclidean projection of x onto {w >= 0, sum w = radius}; sort-based, O(n log n).
inline Vector project_simplex(const VectorRef& x, double radius) {
  const Index n = x.size();
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) threshold = candidate;
  }
  return (x.array() - threshold).cwiseMax(0.0).matrix();
}

inline Vector project_l1_ball(const VectorRef& x, double radius) {
  if (x.lpNorm<1>() <= radius) return x;
  const Vector magnitude = project_simplex(x.cwiseAbs(), radius);
  Vector out(x.size());
  for (Index k = 0; k < x.size(); ++k) out(k) = x(k) < 0.0 ? -magnitude(k) : magnitude(k);
  return out;
}

/// Largest eigenvalue of V^T V by power iteration on R^n.
inline double gram_spectral_norm(const Matrix& vertices) {
  Vector u = Vector::Ones(vertices.cols()).normalized();
  double estimate = 0.0;
  for (int it = 0; it < 100; ++it) {
    const Vector next = vertices.transpose() * (vertices * u);
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    const bool settled = std::abs(norm - estimate) <= 1e-6 * norm;
    estimate = norm;
    u = next / norm;
    if (settled) break;
  }
  return estimate;
}

}  // namespace detail

namespace detail {

/// Moves the weights w by the minimum-norm change that brings V^T w to the
/// least-squares point of x on the affine hull of the vertices whose weight
/// exceeds `threshold` times the largest weight. Returns the refined weights
/// if they stay in the simplex.
inline std::optional<Vector> polish_support(const Matrix& verts, const Vector& w, const VectorRef& x,
                                            double threshold) {
  std::vector<Index> support;
  const double cut = threshold * w.maxCoeff();
  for (Index k = 0; k < w.size(); ++k) {
    if (w(k) > cut) support.push_back(k);
  }
  const Index s = static_cast<Index>(support.size());
  Vector base = Vector::Zero(w.size());
  for (Index k : support) base(k) = w(k);
  base /= base.sum();
  if (s < 2) return base;
  const Vector anchor = verts.row(support.back()).transpose();
  Matrix d(verts.cols(), s - 1);
  for (Index j = 0; j + 1 < s; ++j) d.col(j) = verts.row(support[static_cast<std::size_t>(j)]).transpose() - anchor;
  const Vector correction = d.completeOrthogonalDecomposition().solve(x - verts.transpose() * base);
  for (Index j = 0; j + 1 < s; ++j) base(support[static_cast<std::size_t>(j)]) += correction(j);
  base(support.back()) -= correction.sum();
  if (!base.allFinite() || base.minCoeff() < 0.0) return std::nullopt;
  return base;
}

}  // namespace detail

struct PolytopeSolverOptions {
  /// Stop once the Frank-Wolfe certificate max_w (x - p)^T (w - p) over the
  /// polytope drops below this value.
  double tol = 1e-10;
  long max_iter = 100000;
};

/// Projection onto a vertex polytope: minimize 0.5 ||V^T w - x||^2 over the
/// unit simplex of hull weights w with accelerated projected gradient
/// (backtracking, function-value restart).
inline Vector project_polytope(const VertexPolytope& poly, const VectorRef& x,
                               const PolytopeSolverOptions& opts = {}) {
  const Matrix& verts = poly.vertices;
  const Index m = verts.rows();
  if (m == 1) return verts.row(0).transpose();

  auto point = [&](const Vector& w) -> Vector { return verts.transpose() * w; };
  auto objective = [&](const Vector& p) { return 0.5 * (p - x).squaredNorm(); };

  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Vector p = point(w);
  double value = objective(p);
  Vector extrapolated = w;
  Vector prev_w = w;
  double momentum = 1.0;
  double lipschitz = std::max(1.05 * detail::gram_spectral_norm(verts), 1e-300);
  double best_gap = std::numeric_limits<double>::infinity();
  long best_gap_iter = 0;
  auto certificate = [&](const Vector& weights, const Vector& at) {
    const Vector scores = verts * (at - x);
    return scores.dot(weights) - scores.minCoeff();
  };
  // Finishes on the face carrying the weights, trying progressively smaller
  // faces; returns the best polished point if it certifies to `target`.
  auto polished = [&](const Vector& weights, double target) -> std::optional<Vector> {
    std::optional<Vector> best;
    double best_value = target;
    for (double threshold : {0.0, 1e-12, 1e-9, 1e-6}) {
      const auto refined = detail::polish_support(verts, weights, x, threshold);
      if (!refined) continue;
      Vector q = point(*refined);
      const double c = certificate(*refined, q);
      if (c <= best_value) {
        best_value = c;
        best = std::move(q);
      }
    }
    return best;
  };

  for (long it = 0; it < opts.max_iter; ++it) {
    const double gap = certificate(w, p);
    if (gap <= opts.tol) return polished(w, gap).value_or(p);
    if (gap < 0.5 * best_gap) {
      best_gap = gap;
      best_gap_iter = it;
    } else if (it - best_gap_iter > 500) {
      // Progress below the round-off of the objective: the face is identified.
      if (auto q = polished(w, opts.tol)) return *q;
      throw NumericError("polytope projection stalled at certificate " + std::to_string(gap));
    }

    const Vector y_point = point(extrapolated);
    const double y_value = objective(y_point);
    const Vector y_grad = verts * (y_point - x);
    Vector candidate;
    Vector candidate_point;
    double candidate_value = 0.0;
    for (;;) {
      candidate = detail::project_simplex(extrapolated - y_grad / lipschitz, 1.0);
      candidate_point = point(candidate);
      candidate_value = objective(candidate_point);
      const Vector diff = candidate - extrapolated;
      if (candidate_value <= y_value + y_grad.dot(diff) + 0.5 * lipschitz * diff.squaredNorm() + 1e-15 * y_value) {
        break;
      }
      lipschitz *= 2.0;
    }

    if (candidate_value > value && momentum > 1.0) {
      // Restart momentum from the last accepted iterate. Without momentum the
      // candidate is a plain projected-gradient step from w and is accepted.
      momentum = 1.0;
      extrapolated = w;
      continue;
    }
    prev_w = w;
    w = std::move(candidate);
    p = std::move(candidate_point);
    value = candidate_value;
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    extrapolated = w + ((momentum - 1.0) / next_momentum) * (w - prev_w);
    momentum = next_momentum;
  }
  throw NumericError("polytope projection did not converge within " + std::to_string(opts.max_iter) +
                     " iterations");
}

/// A vertex minimizing v^T z over the set. Ties go to the smallest index
/// (simplex, l1 ball, polytope) or to the lower bound (box).
inline Vector lmo(const FeasibleSet& set, const VectorRef& z) {
  require_dim(z.size(), set.dim(), "lmo");
  return std::visit(
      detail::overloaded{
          [&](const Box& b) -> Vector {
            Vector v(z.size());
            for (Index k = 0; k < z.size(); ++k) v(k) = z(k) < 0.0 ? b.upper(k) : b.lower(k);
            return v;
          },
          [&](const Simplex& s) -> Vector {
            Index best = 0;
            for (Index k = 1; k < z.size(); ++k) {
              if (z(k) < z(best)) best = k;
            }
            Vector v = Vector::Zero(z.size());
            v(best) = s.radius;
            return v;
          },
          [&](const L1Ball& l) -> Vector {
            Index best = 0;
            for (Index k = 1; k < z.size(); ++k) {
              if (std::abs(z(k)) > std::abs(z(best))) best = k;
            }
            Vector v = Vector::Zero(z.size());
            v(best) = z(best) < 0.0 ? l.radius : -l.radius;
            return v;
          },
          [&](const VertexPolytope& poly) -> Vector {
            const Vector scores = poly.vertices * z;
            Index best = 0;
            for (Index k = 1; k < scores.size(); ++k) {
              if (scores(k) < scores(best)) best = k;
            }
            return poly.vertices.row(best).transpose();
          },
      },
      set.variant());
}

inline Vector project(const FeasibleSet& set, const VectorRef& x, const PolytopeSolverOptions& opts = {}) {
  require_dim(x.size(), set.dim(), "project");
  return std::visit(
      detail::overloaded{
          [&](const Box& b) -> Vector { return x.cwiseMax(b.lower).cwiseMin(b.upper); },
          [&](const Simplex& s) -> Vector { return detail::project_simplex(x, s.radius); },
          [&](const L1Ball& l) -> Vector { return detail::project_l1_ball(x, l.radius); },
          [&](const VertexPolytope& poly) -> Vector { return project_polytope(poly, x, opts); },
      },
      set.variant());
}

inline bool contains(const FeasibleSet& set, const VectorRef& x, double tol) {
  return (x - project(set, x)).norm() <= tol;
}

/// Feasible point drawn as a convex combination of vertices with normalized
/// exponential weights. Boxes mix dim + 1 random corners.
inline Vector sample_point(const FeasibleSet& set, std::uint64_t seed) {
  Rng rng(seed);
  auto weights = [&rng](Index m) {
    Vector w(m);
    for (Index k = 0; k < m; ++k) w(k) = rng.exponential();
    return Vector(w / w.sum());
  };
  return std::visit(
      detail::overloaded{
          [&](const Box& b) -> Vector {
            const Index n = b.lower.size();
            const Vector w = weights(n + 1);
            Vector x = Vector::Zero(n);
            for (Index j = 0; j <= n; ++j) {
              for (Index k = 0; k < n; ++k) x(k) += w(j) * (rng.uniform() < 0.5 ? b.lower(k) : b.upper(k));
            }
            return x.cwiseMax(b.lower).cwiseMin(b.upper);
          },
          [&](const Simplex& s) -> Vector { return s.radius * weights(s.dim); },
          [&](const L1Ball& l) -> Vector {
            const Vector w = weights(2 * l.dim);
            return l.radius * (w.head(l.dim) - w.tail(l.dim));
          },
          [&](const VertexPolytope& poly) -> Vector {
            return poly.vertices.transpose() * weights(poly.vertices.rows());
          },
      },
      set.variant());
}

}  // namespace dcpf
