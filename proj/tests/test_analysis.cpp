#include "difight/analysis.hpp"
#include "difight/errors.hpp"
#include "test_util.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <cmath>

using namespace difight;
using namespace difight::testing;

namespace {

Matrix random_nonnegative(Index n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (unit(rng) < density) m(i, j) = unit(rng);
    }
  }
  return m;
}

// Irreducible by construction: a random matrix plus a positive cycle.
Matrix random_irreducible(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  Matrix m = random_nonnegative(n, 0.3, rng);
  for (Index i = 0; i < n; ++i) m(i, (i + 1) % n) += unit(rng);
  return m;
}

BoundContext random_context(const Network& net, std::mt19937_64& rng, double omega_scale) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = net.size();
  BoundContext ctx;
  ctx.combination = net.combination();
  ctx.omega = Vector::NullaryExpr(n, [&] { return omega_scale * unit(rng); });
  ctx.step_sizes = Vector::NullaryExpr(n, [&] { return 0.1 + unit(rng); });
  ctx.gradient_at_target = Vector::NullaryExpr(n, [&] { return unit(rng); });
  return ctx;
}

// Sum_k B^k b until the terms drop below machine precision.
Vector geometric_series(const Matrix& b_matrix, const Vector& b) {
  Vector term = b;
  Vector sum = b;
  for (int k = 0; k < 100000 && term.lpNorm<Eigen::Infinity>() > 1e-18; ++k) {
    term = b_matrix * term;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(Irreducible, Examples) {
  EXPECT_FALSE(is_irreducible(Matrix::Identity(3, 3)));
  EXPECT_TRUE(is_irreducible(path_graph(5).cast<double>()));
  EXPECT_TRUE(is_irreducible(Matrix::Ones(1, 1)));
  EXPECT_FALSE(is_irreducible(Matrix::Zero(1, 1)));
  Matrix upper = Matrix::Zero(3, 3);
  upper(0, 1) = upper(1, 2) = 1;
  EXPECT_FALSE(is_irreducible(upper));
  upper(2, 0) = 1;
  EXPECT_TRUE(is_irreducible(upper));
  EXPECT_THROW(is_irreducible(-Matrix::Identity(2, 2)), InvalidArgument);
}

TEST(Irreducible, DiagonalScalingPreserves) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 3 + static_cast<int>(seed % 10);
    const Network net = generate_connected_network(n, default_edge_probability(n), seed);
    const Vector d1 = Vector::NullaryExpr(n, [&] { return unit(rng); });
    const Vector d2 = Vector::NullaryExpr(n, [&] { return unit(rng); });
    EXPECT_TRUE(is_irreducible(d1.asDiagonal() * net.combination() * d2.asDiagonal()));
  }
}

TEST(Irreducible, TransposeAndAdditionInvariance) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = random_nonnegative(6, 0.25, rng);
    EXPECT_EQ(is_irreducible(x), is_irreducible(x.transpose()));
    const Matrix irr = random_irreducible(6, rng);
    EXPECT_TRUE(is_irreducible(irr + random_nonnegative(6, 0.3, rng)));
  }
}

TEST(SpectralRadius, Identity) {
  EXPECT_NEAR(spectral_radius(Matrix::Identity(4, 4)).radius, 1.0, 1e-12);
  EXPECT_EQ(spectral_radius(Matrix::Zero(3, 3)).radius, 0.0);
}

TEST(SpectralRadius, UniformOmegaPinches) {
  const Network net = generate_connected_network(9, 0.4, 3);
  const Matrix x = 2.0 * net.combination().transpose() * 0.3;
  EXPECT_NEAR(spectral_radius(x).radius, 0.6, 1e-12);
  EXPECT_NEAR(spectral_radius_dense(x), 0.6, 1e-12);
}

TEST(SpectralRadius, PerronSandwichAndPositivity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = random_irreducible(8, rng);
    const SpectralResult r = spectral_radius(x);
    const Vector rows = x.rowwise().sum();
    EXPECT_GE(r.radius, rows.minCoeff() - 1e-8);
    EXPECT_LE(r.radius, rows.maxCoeff() + 1e-8);
    EXPECT_NEAR(r.radius, spectral_radius_dense(x), 1e-8);
    ASSERT_TRUE(r.perron_vector);
    EXPECT_GT(r.perron_vector->minCoeff(), 0.0);
    EXPECT_LT((x * *r.perron_vector - r.radius * *r.perron_vector).norm(), 1e-8);
  }
}

TEST(SpectralRadius, SignedInputUsesDenseSolver) {
  Matrix rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  const SpectralResult r = spectral_radius(rot);
  EXPECT_TRUE(r.dense_fallback);
  EXPECT_NEAR(r.radius, 1.0, 1e-12);
}

TEST(SpectralRadius, SecondEigenvalue) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 0.9, -0.5, 0.2;
  EXPECT_NEAR(second_eigenvalue_magnitude(d), 0.5, 1e-12);
}

TEST(DeterministicBound, ZeroDriveGivesZeroBound) {
  std::mt19937_64 rng(5);
  const Network net = generate_connected_network(6, 0.5, 5);
  BoundContext ctx = random_context(net, rng, 0.4);
  ctx.gradient_at_target.setZero();
  const BoundReport r = deterministic_bound(ctx);
  ASSERT_TRUE(r.stable);
  EXPECT_EQ(r.limit_bound->norm(), 0.0);
}

TEST(DeterministicBound, UniformOmegaThreshold) {
  const Network net = generate_connected_network(7, 0.4, 6);
  std::mt19937_64 rng(7);
  BoundContext ctx = random_context(net, rng, 1.0);
  for (double omega : {0.2, 0.49, 0.51, 0.8}) {
    ctx.omega = Vector::Constant(7, omega);
    const BoundReport r = deterministic_bound(ctx);
    EXPECT_EQ(r.stable, omega < 0.5) << omega;
    EXPECT_NEAR(r.spectral_radius, 2.0 * omega, 1e-12);
    EXPECT_EQ(r.conditions.omega_holds(), omega < 0.5);
  }
}

TEST(DeterministicBound, ThreeNodeHandCase) {
  const Network net = Network::from_adjacency(path_graph(3));
  BoundContext ctx;
  ctx.combination = net.combination();
  ctx.omega = Vector(3);
  ctx.omega << 0.1, 0.2, 0.1;
  ctx.step_sizes = Vector::Constant(3, 0.5);
  ctx.gradient_at_target = Vector(3);
  ctx.gradient_at_target << 0.3, 0.1, 0.2;
  const BoundReport r = deterministic_bound(ctx);
  ASSERT_TRUE(r.stable);

  Matrix at(3, 3);  // A^T for the path graph, written out
  at << 0.5, 0.5, 0.0,
        1.0 / 3, 1.0 / 3, 1.0 / 3,
        0.0, 0.5, 0.5;
  const Matrix lhs = Matrix::Identity(3, 3) - 2.0 * at * ctx.omega.asDiagonal();
  const Vector rhs = 2.0 * at * (ctx.step_sizes.cwiseProduct(ctx.gradient_at_target));
  const Vector expected = lhs.partialPivLu().solve(rhs);
  EXPECT_LT((*r.limit_bound - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RandomizedBound, FullParticipationReducesToDeterministic) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net = generate_connected_network(8, 0.4, static_cast<std::uint64_t>(trial));
    BoundContext ctx = random_context(net, rng, 0.7);
    ctx.gain = trial % 2 ? 4.0 : 2.0;
    const BoundReport det = deterministic_bound(ctx);
    ctx.participation = Vector::Ones(8);
    const BoundReport ran = randomized_bound(ctx);
    EXPECT_EQ(det.stable, ran.stable);
    EXPECT_NEAR(det.spectral_radius, ran.spectral_radius, 1e-10);
    if (det.stable) {
      EXPECT_LT((*det.limit_bound - *ran.limit_bound).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(RandomizedBound, ZeroDrive) {
  std::mt19937_64 rng(9);
  const Network net = generate_connected_network(6, 0.5, 9);
  BoundContext ctx = random_context(net, rng, 0.3);
  ctx.gradient_at_target.setZero();
  ctx.participation = Vector::Constant(6, 0.3);
  const BoundReport r = randomized_bound(ctx);
  ASSERT_TRUE(r.stable);
  EXPECT_EQ(r.limit_bound->norm(), 0.0);
}

TEST(RandomizedBound, RpCycleTwoSolversAgree) {
  const Network net = Network::from_adjacency(cycle_graph(4));
  BoundContext ctx;
  ctx.combination = net.combination();
  ctx.omega = Vector::Constant(4, 0.1);
  ctx.step_sizes = Vector::Constant(4, 0.5);
  ctx.gradient_at_target = Vector::Constant(4, 0.2);
  ctx.participation = Vector::Constant(4, 0.25);
  const BoundReport r = randomized_bound(ctx);
  EXPECT_NEAR(r.spectral_radius, spectral_radius_dense(r.iteration_matrix), 1e-9);
  EXPECT_TRUE(r.stable);
  EXPECT_LT(r.conditions.weighted_max, r.conditions.threshold);
}

TEST(BoundContext, Validation) {
  const Network net = Network::from_adjacency(path_graph(3));
  BoundContext ctx;
  ctx.combination = net.combination();
  ctx.omega = Vector::Constant(3, 0.1);
  ctx.step_sizes = Vector::Constant(3, 0.1);
  ctx.gradient_at_target = Vector::Constant(2, 0.1);
  EXPECT_THROW(deterministic_bound(ctx), InvalidArgument);
  ctx.gradient_at_target = Vector::Constant(3, 0.1);
  ctx.participation = Vector::Constant(3, 1.5);
  EXPECT_THROW(randomized_bound(ctx), InvalidArgument);
  ctx.participation.resize(0);
  ctx.gain = 3.0;
  EXPECT_THROW(deterministic_bound(ctx), InvalidArgument);
}

TEST(Lemma3, ZeroMatrixLimitIsDrive) {
  const Vector b = Vector::LinSpaced(4, 0.1, 0.4);
  const Lemma3Report r = check_lemma3(Matrix::Zero(4, 4), b, Vector::Ones(4), 10);
  EXPECT_EQ(r.limit, b);
  EXPECT_EQ(r.final_iterate, b);
  EXPECT_TRUE(r.holds);
}

TEST(Lemma3, ZeroDriveDecays) {
  std::mt19937_64 rng(10);
  Matrix b_matrix = random_irreducible(5, rng);
  b_matrix *= 0.8 / spectral_radius_dense(b_matrix);
  const Lemma3Report r = check_lemma3(b_matrix, Vector::Zero(5), Vector::Ones(5), 2000);
  EXPECT_LT(r.final_iterate.norm(), 1e-12);
}

TEST(Lemma3, MatchesGeometricSeries) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix b_matrix = random_nonnegative(6, 0.6, rng);
    b_matrix *= (0.3 + 0.6 * unit(rng)) / std::max(spectral_radius_dense(b_matrix), 1e-3);
    const Vector b = Vector::NullaryExpr(6, [&] { return unit(rng); });
    const Lemma3Report r = check_lemma3(b_matrix, b, Vector::Zero(6), 10000);
    const Vector oracle = geometric_series(b_matrix, b);
    EXPECT_LT((r.final_iterate - oracle).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((r.limit - oracle).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((r.stated_limit - (oracle - b)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_TRUE(r.holds);
  }
}

TEST(Lemma3, RejectsUnstableOrNegative) {
  EXPECT_THROW(check_lemma3(Matrix::Identity(2, 2), Vector::Ones(2), Vector::Zero(2), 5),
               InvalidArgument);
  EXPECT_THROW(check_lemma3(Matrix::Zero(2, 2), -Vector::Ones(2), Vector::Zero(2), 5),
               InvalidArgument);
}

TEST(Empirical, UnstableContextIsFlagged) {
  const Network net = Network::from_adjacency(path_graph(3));
  BoundContext ctx;
  ctx.combination = net.combination();
  ctx.omega = Vector::Constant(3, 0.9);
  ctx.step_sizes = Vector::Constant(3, 0.1);
  ctx.gradient_at_target = Vector::Zero(3);
  RunTrace trace;
  trace.errors = {Vector::Ones(3), Vector::Ones(3)};
  const std::vector<RunTrace> traces = {trace};
  const EmpiricalReport r = empirical_vs_theoretical(traces, ctx, false);
  EXPECT_EQ(r.verdict, "condition violated");
  EXPECT_FALSE(r.bound);
}

TEST(Empirical, NoiselessRunMeetsZeroBound) {
  std::mt19937_64 rng(12);
  const Network net = generate_connected_network(4, 0.6, 12);
  const Vector x_star = random_sparse(20, 2, rng);
  std::vector<LeastSquaresCost> costs;
  for (int v = 0; v < 4; ++v) {
    const Matrix phi = gaussian_matrix(60, 20, rng, 1.0 / std::sqrt(60.0));
    costs.emplace_back(phi, phi * x_star, v);
  }
  AlgorithmSpec spec;
  spec.sparsity = 2;
  spec.step_sizes = std::vector<double>(4, 0.5);
  spec.max_iterations = 300;
  const std::vector<RunTrace> traces = {run(spec, net, costs, x_star, 1)};

  BoundContext ctx;
  ctx.combination = net.combination();
  ctx.omega = Vector::Constant(4, 0.3);
  ctx.step_sizes = Vector::Constant(4, 0.5);
  ctx.gradient_at_target = Vector::Zero(4);
  const EmpiricalReport r = empirical_vs_theoretical(traces, ctx, false);
  EXPECT_EQ(r.verdict, "verified");
  EXPECT_LE(r.max_excess, 1e-9);
}

TEST(ErrorRecursion, HoldsPerIterationWithExactSupports) {
  std::mt19937_64 rng(13);
  const Network net = generate_connected_network(4, 0.6, 13);
  const Index n = 16, k = 2;
  const Vector x_star = random_sparse(n, k, rng);
  std::vector<LeastSquaresCost> costs;
  std::vector<double> steps;
  for (int v = 0; v < 4; ++v) {
    const Matrix phi = gaussian_matrix(14, n, rng, 1.0 / std::sqrt(14.0));
    costs.emplace_back(phi, phi * x_star, v);
    CurvatureOptions exact;
    exact.mode = CurvatureMode::Exact;
    steps.push_back(optimal_step_size(restricted_curvature(costs.back(), 3 * k, exact)));
  }
  for (auto kind : {AlgorithmKind::DiFIGHT, AlgorithmKind::MoDiFIGHT}) {
    std::vector<Vector> x(4, Vector::Zero(n));
    for (int it = 0; it < 40; ++it) {
      const auto next = kind == AlgorithmKind::DiFIGHT ? step_difight(net, costs, x, steps, k)
                                                       : step_modifight(net, costs, x, steps, k);
      const auto report = check_error_recursion(net, costs, x_star, steps, k, kind, x, next);
      EXPECT_TRUE(report.holds()) << to_string(kind) << " iteration " << it << " excess "
                                  << report.max_excess;
      x = next;
    }
  }
}

TEST(MakeBoundContext, FillsParticipation) {
  std::mt19937_64 rng(14);
  const Network net = generate_connected_network(5, 0.5, 14);
  const Vector x_star = random_sparse(10, 1, rng);
  std::vector<LeastSquaresCost> costs;
  std::vector<CurvatureBounds> curvature;
  for (int v = 0; v < 5; ++v) {
    const Matrix phi = gaussian_matrix(8, 10, rng, 0.35);
    costs.emplace_back(phi, phi * x_star, v);
    curvature.push_back({1.0, 3.0, 3, true});
  }
  const std::vector<double> steps(5, 0.5);
  const BoundContext ctx = make_bound_context(net, costs, x_star, steps, curvature, 1,
                                              AlgorithmKind::MoDiFIGHT,
                                              SelectionStrategy::uniform(StrategyKind::RP));
  EXPECT_EQ(ctx.gain, 4.0);
  EXPECT_NEAR(ctx.omega[0], 0.5, 1e-15);
  EXPECT_LT(ctx.gradient_at_target.norm(), 1e-12);
  EXPECT_NEAR(ctx.participation[2], 0.2, 1e-15);
}
