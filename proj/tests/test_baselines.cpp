#include <gtest/gtest.h>

#include "dcpf/baselines.hpp"
#include "oracles.hpp"

using namespace dcpf;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

Problem shared_cost_problem(Index n_agents, const Vector& center) {
  const Vector b = -2.0 * center;
  std::vector<QuadraticCost> costs(static_cast<std::size_t>(n_agents),
                                   QuadraticCost(2.0 * Matrix::Identity(2, 2), b, center.squaredNorm()));
  return Problem{doubly_stochastic(make_topology(Topology::undirected_ring, n_agents, 1.0)),
                 Objective(std::move(costs)), FeasibleSet::uniform_box(2, -2.0, 2.0)};
}

/// The pinned N = 20 ring instance in dimension n.
Problem ring_instance(Index n, bool mixing) {
  const Digraph ring = make_topology(Topology::undirected_ring, 20, 1.0);
  return Problem{mixing ? doubly_stochastic(ring) : ring, random_instance(20, n, 2024 + static_cast<std::uint64_t>(n), 4.0),
                 FeasibleSet::uniform_box(n, -2.0, 2.0)};
}

AgentMatrix random_rows(std::mt19937_64& rng, Index rows, Index cols, double lo, double hi) {
  AgentMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) m.row(i) = oracle::random_vector(rng, cols, lo, hi).transpose();
  return m;
}

}  // namespace

TEST(Mixing, DoublyStochasticRing) {
  const Digraph g = doubly_stochastic(make_topology(Topology::undirected_ring, 20, 1.0));
  EXPECT_NO_THROW(validate_mixing(g));
  EXPECT_DOUBLE_EQ(g.weight(0, 1), 0.5);
  std::mt19937_64 rng(31);
  const AgentMatrix m = random_rows(rng, 20, 4, -3.0, 3.0);
  const AgentMatrix avg = neighbor_average(g, 0.5, m);
  EXPECT_LT((avg.colwise().mean() - m.colwise().mean()).norm(), 1e-12);
}

TEST(Mixing, RejectsUnsuitableGraphs) {
  EXPECT_THROW(validate_mixing(make_topology(Topology::undirected_ring, 5, 1.0)), AssumptionError);
  EXPECT_THROW(validate_mixing(make_topology(Topology::directed_ring, 5, 1.0)), AssumptionError);
  EXPECT_THROW(doubly_stochastic(make_topology(Topology::directed_ring, 5, 1.0)), AssumptionError);
  Matrix star = Matrix::Zero(4, 4);
  for (Index j = 1; j < 4; ++j) star(0, j) = star(j, 0) = 1.0;
  EXPECT_THROW(doubly_stochastic(Digraph(star)), AssumptionError);
}

TEST(Mixing, RepeatedAveragingConvergesToInitialMean) {
  const Digraph g = doubly_stochastic(make_topology(Topology::undirected_ring, 8, 1.0));
  std::mt19937_64 rng(32);
  AgentMatrix m = random_rows(rng, 8, 3, -1.0, 1.0);
  const Eigen::RowVectorXd mean = m.colwise().mean();
  for (int k = 0; k < 2000; ++k) m = neighbor_average(g, 0.5, m);
  for (Index i = 0; i < 8; ++i) EXPECT_LT((m.row(i) - mean).norm(), 1e-12);
}

TEST(DiscretizedCg, FixedPoint) {
  const Problem p = shared_cost_problem(4, vec({3, 3}));
  const AgentMatrix x = AgentMatrix::Constant(4, 2, 2.0);
  const DiscreteIterate next = discretized_cg_step(x, p.objective.stacked_grad(x), p, 0, DiscreteConfig{});
  EXPECT_EQ(next.x, x);
  EXPECT_EQ(next.z, p.objective.stacked_grad(x));
}

TEST(DiscretizedCg, MatchesAgentwiseFormula) {
  const Problem p = ring_instance(3, true);
  std::mt19937_64 rng(33);
  const AgentMatrix x = random_rows(rng, 20, 3, -2.0, 2.0);
  const AgentMatrix z = random_rows(rng, 20, 3, -1.0, 1.0);
  DiscreteConfig cfg;
  cfg.delta = 0.3;
  const DiscreteIterate next = discretized_cg_step(x, z, p, 4, cfg);
  const double eta = 0.3 / 5.0;
  const Matrix& a = p.graph.adjacency();
  for (Index i = 0; i < 20; ++i) {
    Vector avg_x = 0.7 * x.row(i).transpose();
    Vector avg_z = 0.7 * z.row(i).transpose();
    for (Index j = 0; j < 20; ++j) {
      avg_x += 0.3 * a(i, j) * x.row(j).transpose();
      avg_z += 0.3 * a(i, j) * z.row(j).transpose();
    }
    const Vector xi_next = avg_x + eta * (lmo(p.set, z.row(i).transpose()) - x.row(i).transpose());
    const Vector zi_next =
        avg_z + p.objective.cost(i).grad(xi_next) - p.objective.cost(i).grad(x.row(i).transpose());
    EXPECT_LT((next.x.row(i).transpose() - xi_next).norm(), 1e-13);
    EXPECT_LT((next.z.row(i).transpose() - zi_next).norm(), 1e-12);
  }
}

TEST(DiscretizedCg, TrackingSumTelescopes) {
  const Problem p = ring_instance(5, true);
  std::mt19937_64 rng(34);
  AgentMatrix x = initial_positions(p.set, 20, 3);
  AgentMatrix z = p.objective.stacked_grad(x) + random_rows(rng, 20, 5, -1.0, 1.0);
  const Eigen::RowVectorXd offset = z.colwise().sum() - p.objective.stacked_grad(x).colwise().sum();
  for (long k = 0; k < 50; ++k) {
    const DiscreteIterate next = discretized_cg_step(x, z, p, k, DiscreteConfig{});
    x = next.x;
    z = next.z;
    const Eigen::RowVectorXd now = z.colwise().sum() - p.objective.stacked_grad(x).colwise().sum();
    ASSERT_LT((now - offset).norm(), 1e-10);
  }
}

TEST(DiscretizedCg, RequiresMixingGraph) {
  const Problem p = ring_instance(2, false);
  const AgentMatrix x = AgentMatrix::Zero(20, 2);
  EXPECT_THROW(discretized_cg_step(x, x, p, 0, DiscreteConfig{}), AssumptionError);
  EXPECT_THROW(defw_step(x, p, 0, DiscreteConfig{}), AssumptionError);
}

TEST(Defw, ConsensusStateWithCommonCostUsesTrueGradient) {
  const Problem p = shared_cost_problem(5, vec({0.5, -0.25}));
  const AgentMatrix x = AgentMatrix::Constant(5, 2, 0.1);
  const AgentMatrix z = detail::defw_direction(x, p, 0.5);
  for (Index i = 0; i < 5; ++i) EXPECT_LT((z.row(i).transpose() - p.objective.cost(0).grad(vec({0.1, 0.1}))).norm(), 1e-14);
}

TEST(Defw, ConsensusStateTakesClassicalFrankWolfeStep) {
  const Problem p = shared_cost_problem(4, vec({0.5, -0.25}));
  const AgentMatrix x = AgentMatrix::Constant(4, 2, 0.1);
  DiscreteConfig cfg;
  const AgentMatrix next = defw_step(x, p, 3, cfg);
  const Vector xbar = vec({0.1, 0.1});
  const Vector v = lmo(p.set, p.objective.cost(0).grad(xbar));
  const Vector expected = xbar + cfg.eta(3) * (v - xbar);
  for (Index i = 0; i < 4; ++i) EXPECT_LT((next.row(i).transpose() - expected).norm(), 1e-15);
}

TEST(Defw, WithinTwiceTheDiscretizedGap) {
  const Problem p = ring_instance(16, true);
  const ReferenceSolution ref = reference_solution(p.objective, p.set, 1e-10);
  const AgentMatrix x0 = initial_positions(p.set, 20, 17);
  const DiscreteConfig cfg;
  const RunRecord cg = run_cg_discrete(p, cfg, x0, ref);
  const RunRecord defw = run_defw(p, cfg, x0, ref);
  EXPECT_LE(defw.optimality_gap.back(), 2.0 * cg.optimality_gap.back())
      << "defw " << defw.optimality_gap.back() << " vs cg_discrete " << cg.optimality_gap.back();
}

TEST(DiscreteRuns, IteratesStayFeasible) {
  const Problem p = ring_instance(8, true);
  const ReferenceSolution ref = reference_solution(p.objective, p.set, 1e-10);
  DiscreteConfig cfg;
  cfg.n_iters = 300;
  cfg.record_every = 1;
  for (auto runner : {&run_cg_discrete, &run_defw}) {
    bool feasible = true;
    const RunRecord rec = runner(p, cfg, initial_positions(p.set, 20, 5), ref, [&](const NetworkState& s) {
      for (Index i = 0; i < 20; ++i) feasible = feasible && contains(p.set, s.x.row(i).transpose(), 1e-9);
    });
    EXPECT_TRUE(feasible);
    EXPECT_EQ(rec.size(), 301U);
  }
}

TEST(DiscreteRuns, BaselinesReachSmallGapOnPinnedInstance) {
  const Problem p = ring_instance(16, true);
  const ReferenceSolution ref = reference_solution(p.objective, p.set, 1e-10);
  const AgentMatrix x0 = initial_positions(p.set, 20, 17);
  EXPECT_LT(run_cg_discrete(p, DiscreteConfig{}, x0, ref).optimality_gap.back(), 1e-2);
  ProjectedConfig pc;
  pc.horizon = 500.0;
  EXPECT_LT(run_projected(ring_instance(16, false), pc, x0, ref).optimality_gap.back(), 1e-2);
}

TEST(DiscreteRuns, DefwReachesSmallGapOnPinnedInstance) {
  const Problem p = ring_instance(16, true);
  const ReferenceSolution ref = reference_solution(p.objective, p.set, 1e-10);
  const RunRecord rec = run_defw(p, DiscreteConfig{}, initial_positions(p.set, 20, 17), ref);
  EXPECT_LT(rec.optimality_gap.back(), 1e-2);
}

TEST(Projected, FixedPointAtConstrainedOptimum) {
  Problem p = shared_cost_problem(3, vec({3, 3}));
  p.graph = make_topology(Topology::undirected_ring, 3, 1.0);
  const AgentMatrix x = AgentMatrix::Constant(3, 2, 2.0);
  const AgentMatrix y = AgentMatrix::Zero(3, 2);
  const auto [xn, yn] = projected_dynamics_step(x, y, p, 0.1, 1.0);
  EXPECT_EQ(xn, x);
  EXPECT_EQ(yn, y);
}

TEST(Projected, FixedPointAtInteriorStationaryPoint) {
  Problem p = shared_cost_problem(3, vec({0.5, -1.5}));
  p.graph = make_topology(Topology::complete, 3, 1.0);
  AgentMatrix x(3, 2);
  x.rowwise() = vec({0.5, -1.5}).transpose();
  const auto [xn, yn] = projected_dynamics_step(x, AgentMatrix::Zero(3, 2), p, 0.5, 2.0);
  EXPECT_LT((xn - x).norm(), 1e-15);
  EXPECT_TRUE(yn.isZero(0.0));
}

TEST(Projected, AgreesWithContinuousDynamicsOnPinnedInstance) {
  const Problem p = ring_instance(16, false);
  const ReferenceSolution ref = reference_solution(p.objective, p.set, 1e-10);
  const AgentMatrix x0 = initial_positions(p.set, 20, 17);
  Vector mean_ode;
  Vector mean_projected;
  IntegratorConfig ic;
  ic.step = 0.25;
  ic.horizon = 400.0;
  simulate(p, Schedule::inverse_linear(), ic, x0, ref, [&](const NetworkState& s) { mean_ode = row_mean(s.x); });
  ProjectedConfig pc;
  pc.horizon = 500.0;
  run_projected(p, pc, x0, ref, [&](const NetworkState& s) { mean_projected = row_mean(s.x); });
  EXPECT_LT((mean_ode - mean_projected).norm(), 1e-2);
}

TEST(Projected, ConservesTrackingSum) {
  const Problem p = ring_instance(6, false);
  const ReferenceSolution ref = reference_solution(p.objective, p.set, 1e-10);
  ProjectedConfig pc;
  pc.horizon = 50.0;
  double worst = 0.0;
  run_projected(p, pc, initial_positions(p.set, 20, 2), ref,
                [&](const NetworkState& s) { worst = std::max(worst, s.y.colwise().sum().norm()); });
  EXPECT_LE(worst, 1e-8 * (1.0 + pc.horizon));
}

TEST(Configs, RejectInvalidParameters) {
  DiscreteConfig d;
  d.delta = 1.0;
  EXPECT_THROW(d.validate(), ConfigError);
  d.delta = 0.5;
  d.n_iters = 0;
  EXPECT_THROW(d.validate(), ConfigError);
  ProjectedConfig pc;
  pc.step = 1.5;
  EXPECT_THROW(pc.validate(), ConfigError);
  const Problem p = shared_cost_problem(3, vec({0, 0}));
  EXPECT_THROW(projected_dynamics_step(AgentMatrix::Zero(3, 2), AgentMatrix::Zero(3, 2), p, 0.0, 1.0), ConfigError);
  EXPECT_THROW(projected_dynamics_step(AgentMatrix::Zero(2, 2), AgentMatrix::Zero(3, 2), p, 0.1, 1.0), DimensionError);
}
