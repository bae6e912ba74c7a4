#pragma once

#include "difight/signals.hpp"

#include <cstdint>
#include <span>

namespace difight {

/// f(z) = ||y - Phi z||_2^2 held by one node.
class LeastSquaresCost {
 public:
  LeastSquaresCost() = default;
  LeastSquaresCost(Matrix phi, Vector y, int node = 0);

  /// All measurements of `costs` stacked into a single cost (node id 0).
  static LeastSquaresCost stacked(std::span<const LeastSquaresCost> costs);

  double value(const Vector& z) const;
  /// 2 Phi^T (Phi z - y).
  Vector gradient(const Vector& z) const;
  /// 2 Phi^T Phi, constant for a quadratic cost.
  const Matrix& hessian() const { return hessian_; }

  const Matrix& phi() const { return phi_; }
  const Vector& y() const { return y_; }
  int node() const { return node_; }
  Index measurements() const { return phi_.rows(); }
  Index dimension() const { return phi_.cols(); }

 private:
  Matrix phi_;
  Vector y_;
  Matrix hessian_;
  int node_ = 0;
};

/// Two-sided bound on the Hessian quadratic form over k-sparse directions.
/// `alpha` is zero when some k columns of Phi are linearly dependent.
struct CurvatureBounds {
  double alpha = 0.0;
  double beta = 0.0;
  Index order = 0;
  bool exact = false;  // all supports enumerated; false means sampled
};

enum class CurvatureMode { Exact, Sampled };

struct CurvatureOptions {
  CurvatureMode mode = CurvatureMode::Sampled;
  int samples = 500;
  std::uint64_t seed = 0;
  double enumeration_budget = 1e6;
};

/// Extreme eigenvalues of 2 Phi_S^T Phi_S over supports |S| = k: every
/// support in Exact mode, `samples` uniform supports in Sampled mode. Exact
/// mode throws BudgetExceeded when C(N, k) exceeds the budget.
CurvatureBounds restricted_curvature(const LeastSquaresCost& cost, Index k,
                                     const CurvatureOptions& options = {});

/// Exact extreme eigenvalues of 2 Phi_S^T Phi_S on one support.
CurvatureBounds support_curvature(const LeastSquaresCost& cost, const SupportSet& support);

struct ContractionFactor {
  double omega = 0.0;
  double mu = 0.0;
  double optimal_mu = 0.0;     // 2 / (alpha + beta)
  double optimal_omega = 0.0;  // (beta - alpha) / (beta + alpha)
  Index order = 0;
};

/// omega = |1 - mu (beta + alpha)/2| + mu (beta - alpha)/2, which equals the
/// spectral norm bound max(|1 - mu alpha|, |1 - mu beta|).
ContractionFactor contraction_factor(const CurvatureBounds& bounds, double mu);

/// Step size minimizing omega for the given bounds.
double optimal_step_size(const CurvatureBounds& bounds);

/// Both sides of the inner-product and restricted-norm inequalities for
/// g(y, z) = y - z - rho (grad f(y) - grad f(z)), with curvature taken
/// exactly on T = supp(x) u supp(y) u supp(z).
struct Lemma1Report {
  double rho = 0.0;
  double rho_prime = 0.0;
  CurvatureBounds bounds;
  double inner_product = 0.0;   // <x, g(y, z)>
  double inner_bound = 0.0;     // rho' ||x|| ||y - z||
  double restricted_norm = 0.0; // ||g(y, z)_{supp x}||
  double restricted_bound = 0.0;// rho' ||y - z||
  double inner_slack() const { return inner_bound - inner_product; }
  double restricted_slack() const { return restricted_bound - restricted_norm; }
  bool holds(double tolerance = 1e-9) const {
    return inner_slack() >= -tolerance && restricted_slack() >= -tolerance;
  }
};

Lemma1Report check_lemma1(const LeastSquaresCost& cost, double rho, const SparseSignal& x,
                          const SparseSignal& y, const SparseSignal& z);

/// Number of k-subsets of n items as a double (exact below 2^53).
double binomial(Index n, Index k);

}  // namespace difight
