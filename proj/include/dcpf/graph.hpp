#pragma once

// Weighted communication digraphs. a_ij > 0 means agent j sends to agent i.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcpf/error.hpp"
#include "dcpf/types.hpp"

namespace dcpf {

inline constexpr double kBalanceTol = 1e-9;
inline constexpr double kSpectralZeroTol = 1e-9;

class Digraph {
 public:
  /// Takes a square, nonnegative adjacency with zero diagonal.
  explicit Digraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
    if (adjacency_.rows() < 1 || adjacency_.rows() != adjacency_.cols()) {
      throw DimensionError("adjacency must be a nonempty square matrix");
    }
    for (Index i = 0; i < size(); ++i) {
      if (adjacency_(i, i) != 0.0) {
        throw AssumptionError("adjacency diagonal must be zero (node " + std::to_string(i) + ")");
      }
      for (Index j = 0; j < size(); ++j) {
        if (!(adjacency_(i, j) >= 0.0) || !std::isfinite(adjacency_(i, j))) {
          throw AssumptionError("adjacency weights must be finite and nonnegative");
        }
      }
    }
  }

  static Digraph empty(Index n_agents) { return Digraph(Matrix::Zero(n_agents, n_agents)); }

  Index size() const noexcept { return adjacency_.rows(); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  double weight(Index i, Index j) const { return adjacency_(i, j); }

  /// d_i = sum_j a_ij.
  Vector in_degrees() const { return adjacency_.rowwise().sum(); }
  Vector out_degrees() const { return adjacency_.colwise().sum().transpose(); }

  bool operator==(const Digraph& other) const { return adjacency_ == other.adjacency_; }

 private:
  Matrix adjacency_;
};

/// L = D - A.
inline Matrix laplacian(const Digraph& g) {
  Matrix lap = -g.adjacency();
  lap.diagonal() = g.in_degrees();
  return lap;
}

inline bool is_weight_balanced(const Digraph& g, double tol = kBalanceTol) {
  const Vector in = g.in_degrees();
  const Vector out = g.out_degrees();
  return ((in - out).cwiseAbs().array() <= tol).all();
}

namespace detail {

// Nodes reachable from node 0 following j -> i when a_ij > 0 (forward) or
// i -> j (reverse).
inline std::vector<bool> reach_from_first(const Matrix& adj, bool reverse) {
  const Index n = adj.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index w = 0; w < n; ++w) {
      const double a = reverse ? adj(u, w) : adj(w, u);
      if (a > 0.0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace detail

inline bool is_strongly_connected(const Digraph& g) {
  for (bool reverse : {false, true}) {
    const auto seen = detail::reach_from_first(g.adjacency(), reverse);
    for (bool s : seen) {
      if (!s) return false;
    }
  }
  return true;
}

/// Throws AssumptionError naming the first violated graph assumption.
inline void validate_graph_assumptions(const Digraph& g, double tol = kBalanceTol) {
  if (!is_weight_balanced(g, tol)) {
    throw AssumptionError("graph is not weight-balanced (in-degree != out-degree)");
  }
  if (!is_strongly_connected(g)) {
    throw AssumptionError("graph is not strongly connected");
  }
}

/// Smallest positive eigenvalue of (L + L^T)/2.
inline double lambda2(const Digraph& g) {
  if (!is_weight_balanced(g) || !is_strongly_connected(g)) {
    throw AssumptionError("lambda2 requires a strongly connected, weight-balanced graph");
  }
  const Matrix lap = laplacian(g);
  const Matrix sym = 0.5 * (lap + lap.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigen-decomposition failed");
  for (Index k = 0; k < solver.eigenvalues().size(); ++k) {
    if (solver.eigenvalues()(k) > kSpectralZeroTol) return solver.eigenvalues()(k);
  }
  throw AssumptionError("no positive Laplacian eigenvalue: graph is not connected");
}

/// max_i sum_j a_ij.
inline double max_degree(const Digraph& g) { return g.in_degrees().maxCoeff(); }

enum class Topology { directed_ring, undirected_ring, complete };

inline std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::directed_ring: return "directed_ring";
    case Topology::undirected_ring: return "undirected_ring";
    case Topology::complete: return "complete";
  }
  return "unknown";
}

inline std::optional<Topology> parse_topology(std::string_view name) {
  for (Topology t : {Topology::directed_ring, Topology::undirected_ring, Topology::complete}) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

inline Digraph make_topology(Topology kind, Index n_agents, double weight) {
  if (n_agents < 2) throw AssumptionError("topology needs at least two agents");
  if (!(weight > 0.0)) throw AssumptionError("edge weight must be positive");
  Matrix adj = Matrix::Zero(n_agents, n_agents);
  for (Index i = 0; i < n_agents; ++i) {
    const Index prev = (i + n_agents - 1) % n_agents;
    const Index next = (i + 1) % n_agents;
    switch (kind) {
      case Topology::directed_ring:
        adj(i, prev) = weight;
        break;
      case Topology::undirected_ring:
        adj(i, prev) = weight;
        adj(i, next) = weight;
        break;
      case Topology::complete:
        adj.row(i).setConstant(weight);
        adj(i, i) = 0.0;
        break;
    }
  }
  return Digraph(std::move(adj));
}

}  // namespace dcpf
