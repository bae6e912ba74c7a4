#include "difight/cost.hpp"
#include "difight/errors.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>

using namespace difight;
using namespace difight::testing;

namespace {

LeastSquaresCost random_cost(Index m, Index n, std::mt19937_64& rng) {
  return LeastSquaresCost(gaussian_matrix(m, n, rng, 1.0 / std::sqrt(static_cast<double>(m))),
                          gaussian_vector(m, rng));
}

// Smallest and largest eigenvalue of 2 Phi_S^T Phi_S, computed from the
// singular values of Phi_S.
std::pair<double, double> singular_extremes(const Matrix& phi, const std::vector<Index>& s) {
  Matrix sub(phi.rows(), static_cast<Index>(s.size()));
  for (std::size_t c = 0; c < s.size(); ++c) sub.col(static_cast<Index>(c)) = phi.col(s[c]);
  Eigen::JacobiSVD<Matrix> svd(sub);
  const auto& sv = svd.singularValues();
  const double smin = sub.rows() >= sub.cols() ? sv.minCoeff() : 0.0;
  return {2.0 * smin * smin, 2.0 * sv.maxCoeff() * sv.maxCoeff()};
}

}  // namespace

TEST(LeastSquaresCost, RejectsMismatchedShapes) {
  EXPECT_THROW(LeastSquaresCost(Matrix::Zero(3, 4), Vector::Zero(2)), InvalidArgument);
  const LeastSquaresCost cost(Matrix::Identity(3, 3), Vector::Zero(3));
  EXPECT_THROW(cost.gradient(Vector::Zero(4)), InvalidArgument);
}

TEST(LeastSquaresCost, ValueAndGradientIdentity) {
  const LeastSquaresCost cost(Matrix::Identity(3, 3), Vector::LinSpaced(3, 1, 3));
  EXPECT_DOUBLE_EQ(cost.value(Vector::Zero(3)), 14.0);
  EXPECT_EQ(cost.gradient(Vector::Zero(3)), Vector::LinSpaced(3, -2, -6));
}

TEST(LeastSquaresCost, GradientVanishesAtConsistentPoint) {
  std::mt19937_64 rng(3);
  const Matrix phi = gaussian_matrix(6, 10, rng);
  const Vector x = random_sparse(10, 3, rng);
  const LeastSquaresCost cost(phi, phi * x);
  EXPECT_LT(cost.gradient(x).norm(), 1e-12);
}

TEST(LeastSquaresCost, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const LeastSquaresCost cost = random_cost(10, 20, rng);
    const Vector z = gaussian_vector(20, rng);
    Vector fd(20);
    for (Index i = 0; i < 20; ++i) {
      Vector up = z, down = z;
      up[i] += h;
      down[i] -= h;
      fd[i] = (cost.value(up) - cost.value(down)) / (2 * h);
    }
    const Vector g = cost.gradient(z);
    EXPECT_LT((g - fd).norm() / g.norm(), 1e-6);
  }
}

TEST(LeastSquaresCost, StackedConcatenatesRows) {
  std::mt19937_64 rng(5);
  std::vector<LeastSquaresCost> parts = {random_cost(3, 5, rng), random_cost(4, 5, rng)};
  const LeastSquaresCost stacked = LeastSquaresCost::stacked(parts);
  EXPECT_EQ(stacked.measurements(), 7);
  const Vector z = gaussian_vector(5, rng);
  EXPECT_NEAR(stacked.value(z), parts[0].value(z) + parts[1].value(z), 1e-10);
  EXPECT_LT((stacked.gradient(z) - parts[0].gradient(z) - parts[1].gradient(z)).norm(), 1e-10);
}

TEST(RestrictedCurvature, ScaledIdentity) {
  const LeastSquaresCost cost(Matrix::Identity(6, 6) / std::sqrt(2.0), Vector::Zero(6));
  for (Index k = 1; k <= 6; ++k) {
    CurvatureOptions options;
    options.mode = CurvatureMode::Exact;
    const CurvatureBounds b = restricted_curvature(cost, k, options);
    EXPECT_NEAR(b.alpha, 1.0, 1e-12);
    EXPECT_NEAR(b.beta, 1.0, 1e-12);
    EXPECT_TRUE(b.exact);
  }
}

TEST(RestrictedCurvature, DiagonalSingletons) {
  Matrix phi = Matrix::Zero(2, 2);
  phi(0, 0) = 1;
  phi(1, 1) = 2;
  CurvatureOptions options;
  options.mode = CurvatureMode::Exact;
  const CurvatureBounds b = restricted_curvature(LeastSquaresCost(phi, Vector::Zero(2)), 1, options);
  EXPECT_NEAR(b.alpha, 2.0, 1e-12);
  EXPECT_NEAR(b.beta, 8.0, 1e-12);
}

TEST(RestrictedCurvature, SampledRangeInsideExact) {
  std::mt19937_64 rng(6);
  const LeastSquaresCost cost = random_cost(40, 60, rng);
  CurvatureOptions exact;
  exact.mode = CurvatureMode::Exact;
  CurvatureOptions sampled;
  sampled.samples = 2000;
  sampled.seed = 17;
  const CurvatureBounds e = restricted_curvature(cost, 3, exact);
  const CurvatureBounds s = restricted_curvature(cost, 3, sampled);
  EXPECT_GE(s.alpha, e.alpha);
  EXPECT_LE(s.beta, e.beta);
  EXPECT_FALSE(s.exact);
}

TEST(RestrictedCurvature, SandwichOnFreshSupports) {
  std::mt19937_64 rng(7);
  const LeastSquaresCost cost = random_cost(12, 14, rng);
  CurvatureOptions exact;
  exact.mode = CurvatureMode::Exact;
  const CurvatureBounds b = restricted_curvature(cost, 4, exact);
  for (int trial = 0; trial < 200; ++trial) {
    const SupportSet s = SupportSet::of(random_sparse(14, 4, rng));
    const auto [lo, hi] = singular_extremes(cost.phi(), s.indices());
    EXPECT_GE(lo, b.alpha - 1e-10);
    EXPECT_LE(hi, b.beta + 1e-10);
  }
}

TEST(RestrictedCurvature, ExactBudget) {
  std::mt19937_64 rng(8);
  const LeastSquaresCost cost = random_cost(30, 40, rng);
  CurvatureOptions exact;
  exact.mode = CurvatureMode::Exact;
  EXPECT_THROW(restricted_curvature(cost, 9, exact), BudgetExceeded);
  EXPECT_THROW(restricted_curvature(cost, 0, exact), InvalidArgument);
  EXPECT_THROW(restricted_curvature(cost, 41, exact), InvalidArgument);
}

TEST(RestrictedCurvature, RankDeficientOrderGivesZeroAlpha) {
  std::mt19937_64 rng(9);
  const LeastSquaresCost cost = random_cost(3, 6, rng);
  CurvatureOptions exact;
  exact.mode = CurvatureMode::Exact;
  EXPECT_NEAR(restricted_curvature(cost, 4, exact).alpha, 0.0, 1e-12);
}

TEST(SupportCurvature, MatchesSingularValues) {
  std::mt19937_64 rng(10);
  const LeastSquaresCost cost = random_cost(20, 30, rng);
  const SupportSet s({2, 5, 11, 17, 29}, 30);
  const CurvatureBounds b = support_curvature(cost, s);
  const auto [lo, hi] = singular_extremes(cost.phi(), s.indices());
  EXPECT_NEAR(b.alpha, lo, 1e-10);
  EXPECT_NEAR(b.beta, hi, 1e-10);
}

TEST(ContractionFactor, Examples) {
  EXPECT_NEAR(contraction_factor({1.0, 2.0, 3, true}, 2.0 / 3.0).omega, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(contraction_factor({4.0, 4.0, 3, true}, 0.25).omega, 0.0, 1e-15);
  EXPECT_NEAR(contraction_factor({1.0, 2.0, 3, true}, 1e-12).omega, 1.0, 1e-11);
  const ContractionFactor c = contraction_factor({1.0, 3.0, 3, true}, 0.1);
  EXPECT_DOUBLE_EQ(c.optimal_mu, 0.5);
  EXPECT_DOUBLE_EQ(c.optimal_omega, 0.5);
  EXPECT_THROW(contraction_factor({2.0, 1.0, 3, true}, 0.1), InvalidArgument);
  EXPECT_THROW(contraction_factor({1.0, 2.0, 3, true}, 0.0), InvalidArgument);
}

TEST(ContractionFactor, OptimalStepMinimizes) {
  const CurvatureBounds b{0.7, 2.9, 3, true};
  const double best = contraction_factor(b, optimal_step_size(b)).omega;
  for (double mu = 0.01; mu < 1.5; mu += 0.01) {
    EXPECT_GE(contraction_factor(b, mu).omega, best - 1e-15);
  }
}

TEST(Lemma1, ZeroRhoIsCauchySchwarz) {
  std::mt19937_64 rng(11);
  const LeastSquaresCost cost = random_cost(10, 15, rng);
  const SparseSignal x(random_sparse(15, 3, rng), 3);
  const SparseSignal y(random_sparse(15, 3, rng), 3);
  const SparseSignal z(random_sparse(15, 3, rng), 3);
  const Lemma1Report r = check_lemma1(cost, 0.0, x, y, z);
  EXPECT_DOUBLE_EQ(r.rho_prime, 1.0);
  EXPECT_TRUE(r.holds());
}

TEST(Lemma1, EqualPointsGiveZero) {
  std::mt19937_64 rng(12);
  const LeastSquaresCost cost = random_cost(10, 15, rng);
  const SparseSignal x(random_sparse(15, 3, rng), 3);
  const SparseSignal y(random_sparse(15, 3, rng), 3);
  const Lemma1Report r = check_lemma1(cost, 0.3, x, y, y);
  EXPECT_EQ(r.inner_product, 0.0);
  EXPECT_EQ(r.restricted_norm, 0.0);
  EXPECT_TRUE(r.holds());
}

TEST(Lemma1, RandomTriplesHold) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const LeastSquaresCost cost = random_cost(30, 50, rng);
    const SparseSignal x(random_sparse(50, 3, rng), 3);
    const SparseSignal y(random_sparse(50, 3, rng), 3);
    const SparseSignal z(random_sparse(50, 3, rng), 3);
    const SupportSet t = x.support().united(y.support()).united(z.support());
    const double rho = optimal_step_size(support_curvature(cost, t));
    const Lemma1Report r = check_lemma1(cost, rho, x, y, z);
    EXPECT_GE(r.inner_slack(), -1e-9);
    EXPECT_GE(r.restricted_slack(), -1e-9);
  }
}

TEST(Binomial, Values) {
  EXPECT_EQ(binomial(10, 2), 45.0);
  EXPECT_EQ(binomial(40, 9), 273438880.0);
  EXPECT_EQ(binomial(5, 7), 0.0);
}
