#pragma once

// Local quadratic costs f_i(x) = 0.5 x^T Q x + b^T x + c and the network
// objective F = (1/N) sum_i f_i.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dcpf/error.hpp"
#include "dcpf/feasible_set.hpp"
#include "dcpf/types.hpp"

namespace dcpf {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

class QuadraticCost {
 public:
  /// Validates symmetry and positive semidefiniteness of Q.
  QuadraticCost(Matrix hessian, Vector linear, double offset = 0.0)
      : hessian_(std::move(hessian)), linear_(std::move(linear)), offset_(offset) {
    if (hessian_.rows() < 1 || hessian_.rows() != hessian_.cols()) {
      throw DimensionError("cost Hessian must be a nonempty square matrix");
    }
    require_dim(linear_.size(), hessian_.rows(), "cost linear term");
    if (!hessian_.allFinite() || !linear_.allFinite() || !std::isfinite(offset_)) {
      throw AssumptionError("cost coefficients must be finite");
    }
    if ((hessian_ - hessian_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
      throw AssumptionError("cost Hessian is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hessian_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("eigen-decomposition failed");
    if (solver.eigenvalues().minCoeff() < -kPsdTol) {
      throw AssumptionError("cost Hessian is not positive semidefinite (nonconvex cost)");
    }
    lipschitz_ = std::max(solver.eigenvalues().maxCoeff(), 0.0);
  }

  /// f(x) = 0.5 (x - center)^T Q (x - center), with Q's largest eigenvalue
  /// supplied by the caller.
  static QuadraticCost centered(Matrix hessian, const Vector& center, double lipschitz) {
    Vector linear = -(hessian * center);
    const double offset = 0.5 * center.dot(hessian * center);
    return QuadraticCost(Trusted{}, std::move(hessian), std::move(linear), offset, lipschitz);
  }

  Index dim() const noexcept { return linear_.size(); }
  const Matrix& hessian() const noexcept { return hessian_; }
  const Vector& linear() const noexcept { return linear_; }
  double offset() const noexcept { return offset_; }
  /// Lipschitz constant of the gradient, lambda_max(Q).
  double lipschitz() const noexcept { return lipschitz_; }

  double eval(const VectorRef& x) const {
    require_dim(x.size(), dim(), "cost eval");
    return 0.5 * x.dot(hessian_ * x) + linear_.dot(x) + offset_;
  }

  Vector grad(const VectorRef& x) const {
    require_dim(x.size(), dim(), "cost grad");
    return hessian_ * x + linear_;
  }

 private:
  struct Trusted {};
  QuadraticCost(Trusted, Matrix hessian, Vector linear, double offset, double lipschitz)
      : hessian_(std::move(hessian)), linear_(std::move(linear)), offset_(offset), lipschitz_(lipschitz) {}

  Matrix hessian_;
  Vector linear_;
  double offset_ = 0.0;
  double lipschitz_ = 0.0;
};

class Objective {
 public:
  explicit Objective(std::vector<QuadraticCost> costs) : costs_(std::move(costs)) {
    if (costs_.empty()) throw DimensionError("objective needs at least one local cost");
    const Index n = costs_.front().dim();
    for (const auto& c : costs_) require_dim(c.dim(), n, "local cost");
    mean_hessian_ = Matrix::Zero(n, n);
    mean_linear_ = Vector::Zero(n);
    for (const auto& c : costs_) {
      mean_hessian_ += c.hessian();
      mean_linear_ += c.linear();
    }
    mean_hessian_ /= static_cast<double>(costs_.size());
    mean_linear_ /= static_cast<double>(costs_.size());
  }

  Index agents() const noexcept { return static_cast<Index>(costs_.size()); }
  Index dim() const noexcept { return costs_.front().dim(); }
  const QuadraticCost& cost(Index i) const { return costs_.at(static_cast<std::size_t>(i)); }
  const std::vector<QuadraticCost>& costs() const noexcept { return costs_; }

  /// F(x) = (1/N) sum_i f_i(x).
  double global_eval(const VectorRef& x) const {
    double total = 0.0;
    for (const auto& c : costs_) total += c.eval(x);
    return total / static_cast<double>(costs_.size());
  }

  /// Gradient of F, computed from the averaged Hessian and linear term.
  Vector global_grad(const VectorRef& x) const {
    require_dim(x.size(), dim(), "global grad");
    return mean_hessian_ * x + mean_linear_;
  }

  const Matrix& mean_hessian() const noexcept { return mean_hessian_; }

  /// Row i holds grad f_i(x_i).
  AgentMatrix stacked_grad(const AgentMatrix& x) const {
    if (x.rows() != agents()) throw DimensionError("stacked gradient: one row per agent expected");
    require_dim(x.cols(), dim(), "stacked gradient");
    AgentMatrix g(x.rows(), x.cols());
    for (Index i = 0; i < agents(); ++i) {
      const auto& c = costs_[static_cast<std::size_t>(i)];
      g.row(i).noalias() = (c.hessian() * x.row(i).transpose() + c.linear()).transpose();
    }
    return g;
  }

 private:
  std::vector<QuadraticCost> costs_;
  Matrix mean_hessian_;
  Vector mean_linear_;
};

/// max_i lambda_max(Q_i).
inline double lipschitz_bound(const Objective& obj) {
  double kappa = 0.0;
  for (const auto& c : obj.costs()) kappa = std::max(kappa, c.lipschitz());
  return kappa;
}

struct Fig1Instance {
  Objective objective;
  FeasibleSet set;
};

/// Four agents on R^2: f_j(x) = ||x - c_j||^2 with c_j = (5/3 - 2j/3)(1, 1),
/// constrained to the box [-2, 2]^2.
inline Fig1Instance fig1_instance() {
  std::vector<QuadraticCost> costs;
  for (int j = 1; j <= 4; ++j) {
    const double shift = 5.0 / 3.0 - 2.0 * j / 3.0;
    const Vector center = Vector::Constant(2, shift);
    costs.emplace_back(2.0 * Matrix::Identity(2, 2), -2.0 * center, center.squaredNorm());
  }
  return {Objective(std::move(costs)), FeasibleSet::uniform_box(2, -2.0, 2.0)};
}

/// The four starting points of the planar example, one per row.
inline AgentMatrix fig1_initial_positions() {
  AgentMatrix x0(4, 2);
  x0 << -1.8, 1.8,  //
      -1.8, -1.8,   //
      1.8, 1.8,     //
      1.8, -1.8;
  return x0;
}

/// Seeded heterogeneous quadratics: Q_i = R_i^T D_i R_i with D_i log-uniform
/// on [1, conditioning] and R_i a product of random Givens rotations;
/// minimizer c_i uniform on [-1, 1]^dim.
inline Objective random_instance(Index n_agents, Index dim, std::uint64_t seed, double conditioning) {
  if (n_agents < 2) throw AssumptionError("random instance needs at least two agents");
  if (dim < 1) throw DimensionError("random instance dimension must be positive");
  if (!(conditioning >= 1.0) || !std::isfinite(conditioning)) {
    throw AssumptionError("conditioning must be >= 1");
  }
  const double log_cond = std::log(conditioning);
  std::vector<QuadraticCost> costs;
  costs.reserve(static_cast<std::size_t>(n_agents));
  for (Index i = 0; i < n_agents; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    Vector spectrum(dim);
    for (Index k = 0; k < dim; ++k) spectrum(k) = std::exp(log_cond * rng.uniform());
    Matrix q = spectrum.asDiagonal();

    // Q <- G^T Q G for each rotation G acting on coordinates (p, r): two
    // sweeps over neighbouring pairs, then dim pairs drawn at random.
    auto rotate = [&q](Index p, Index r, double angle) {
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      const Eigen::VectorXd col_p = q.col(p);
      q.col(p) = c * col_p - s * q.col(r);
      q.col(r) = s * col_p + c * q.col(r);
      const Eigen::RowVectorXd row_p = q.row(p);
      q.row(p) = c * row_p - s * q.row(r);
      q.row(r) = s * row_p + c * q.row(r);
    };
    if (dim > 1) {
      for (int sweep = 0; sweep < 2; ++sweep) {
        for (Index p = 0; p + 1 < dim; ++p) rotate(p, p + 1, 2.0 * std::numbers::pi * rng.uniform());
      }
      for (Index k = 0; k < dim; ++k) {
        const Index p = rng.index(dim);
        Index r = rng.index(dim - 1);
        if (r >= p) ++r;
        rotate(p, r, 2.0 * std::numbers::pi * rng.uniform());
      }
    }
    q = 0.5 * (q + q.transpose()).eval();

    Vector center(dim);
    for (Index k = 0; k < dim; ++k) center(k) = rng.uniform(-1.0, 1.0);
    costs.push_back(QuadraticCost::centered(std::move(q), center, spectrum.maxCoeff()));
  }
  return Objective(std::move(costs));
}

}  // namespace dcpf
