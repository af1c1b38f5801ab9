#pragma once

// Slow, independent reference computations used only by the tests. None of
// these call into the library's solvers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// min over all 2^n corners of the box of v^T z.
inline double box_vertex_min(const Vec& lower, const Vec& upper, const Vec& z) {
  const long n = lower.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    double value = 0.0;
    for (long k = 0; k < n; ++k) value += z(k) * (((mask >> k) & 1UL) ? upper(k) : lower(k));
    best = std::min(best, value);
  }
  return best;
}

/// min over the rows of `vertices` of v^T z.
inline double listed_vertex_min(const Mat& vertices, const Vec& z) {
  double best = std::numeric_limits<double>::infinity();
  for (long r = 0; r < vertices.rows(); ++r) best = std::min(best, vertices.row(r).dot(z));
  return best;
}

/// Vertices r e_k of the scaled simplex, one per row.
inline Mat simplex_vertices(long n, double r) { return r * Mat::Identity(n, n); }

/// Vertices +-r e_k of the l1 ball, one per row.
inline Mat l1_vertices(long n, double r) {
  Mat v(2 * n, n);
  v << r * Mat::Identity(n, n), -r * Mat::Identity(n, n);
  return v;
}

/// Projection onto {x >= 0, sum x = r} by enumerating every support set and
/// keeping the one whose KKT conditions hold.
inline Vec simplex_projection_active_set(const Vec& x, double r) {
  const long n = x.size();
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 1; mask < (1UL << n); ++mask) {
    double sum = 0.0;
    long count = 0;
    for (long k = 0; k < n; ++k) {
      if ((mask >> k) & 1UL) {
        sum += x(k);
        ++count;
      }
    }
    const double theta = (sum - r) / static_cast<double>(count);
    Vec p = Vec::Zero(n);
    bool kkt = true;
    for (long k = 0; k < n; ++k) {
      if ((mask >> k) & 1UL) {
        p(k) = x(k) - theta;
        if (p(k) < -1e-14) kkt = false;
      } else if (x(k) - theta > 1e-14) {
        kkt = false;
      }
    }
    if (kkt && (p - x).norm() < best_dist) {
      best = p;
      best_dist = (p - x).norm();
    }
  }
  return best;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> jacobi_eigenvalues(Mat a) {
  const long n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (long p = 0; p < n; ++p) {
      for (long q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (long p = 0; p < n; ++p) {
      for (long q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (long k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (long k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = a(k, k);
  std::sort(out.begin(), out.end());
  return out;
}

/// Central finite-difference gradient with step h.
inline Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (long k = 0; k < x.size(); ++k) {
    Vec plus = x;
    Vec minus = x;
    plus(k) += h;
    minus(k) -= h;
    g(k) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

/// Composite Simpson rule with `intervals` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, long intervals) {
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = f(a) + f(b);
  for (long k = 1; k < intervals; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(k));
  return sum * h / 3.0;
}

/// Closed-form solutions of s' = -gamma s + gamma eps.
inline double lemma2_const_gamma_exp_eps(double s0, double t) { return std::exp(-t) * (s0 + t); }
inline double lemma2_const_gamma_zero_eps(double s0, double t) { return s0 * std::exp(-t); }
inline double lemma2_inverse_gamma_inverse_eps(double s0, double t) { return (s0 + std::log1p(t)) / (1.0 + t); }

/// Uniformly random convex weights over m points.
inline Vec random_weights(std::mt19937_64& rng, long m) {
  std::exponential_distribution<double> e(1.0);
  Vec w(m);
  for (long k = 0; k < m; ++k) w(k) = e(rng);
  return w / w.sum();
}

/// Random point of the convex hull of the rows of `vertices`.
inline Vec random_hull_point(std::mt19937_64& rng, const Mat& vertices) {
  return vertices.transpose() * random_weights(rng, vertices.rows());
}

inline Vec random_box_point(std::mt19937_64& rng, const Vec& lower, const Vec& upper) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(lower.size());
  for (long k = 0; k < x.size(); ++k) x(k) = lower(k) + (upper(k) - lower(k)) * u(rng);
  return x;
}

inline Vec random_vector(std::mt19937_64& rng, long n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec x(n);
  for (long k = 0; k < n; ++k) x(k) = u(rng);
  return x;
}

/// Laplacian written out entry by entry.
inline Mat laplacian(const Mat& adj) {
  const long n = adj.rows();
  Mat l = Mat::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      if (i == j) continue;
      l(i, j) = -adj(i, j);
      l(i, i) += adj(i, j);
    }
  }
  return l;
}

}  // namespace oracle
