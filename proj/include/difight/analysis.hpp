#pragma once

#include "difight/cost.hpp"
#include "difight/engine.hpp"
#include "difight/network.hpp"
#include "difight/strategies.hpp"

#include <optional>
#include <span>
#include <string>

namespace difight {

/// A nonnegative square matrix is irreducible iff the digraph of its nonzero
/// entries is strongly connected (a 1x1 matrix needs a positive entry).
/// Throws InvalidArgument on a negative entry.
bool is_irreducible(const Matrix& x);

struct SpectralOptions {
  int max_iterations = 100000;
  double tolerance = 1e-12;
  int dense_fallback_limit = 32;  // largest size handed to the dense solver
};

struct SpectralResult {
  double radius = 0.0;
  std::optional<Vector> perron_vector;  // positive, unit 1-norm
  int iterations = 0;
  double residual = 0.0;
  bool dense_fallback = false;
};

/// Largest eigenvalue magnitude. Nonnegative inputs use shifted power
/// iteration with Collatz-Wielandt bracketing, which also yields the Perron
/// vector; anything that does not pinch within the budget falls back to a
/// dense eigensolve up to `dense_fallback_limit`, otherwise NumericError.
SpectralResult spectral_radius(const Matrix& x, const SpectralOptions& options = {});

/// Dense Hessenberg-QR eigensolve; independent of the power iteration.
double spectral_radius_dense(const Matrix& x);

/// Magnitude of the second largest eigenvalue (by modulus).
double second_eigenvalue_magnitude(const Matrix& x);

/// Quantities entering the error-recursion bounds.
struct BoundContext {
  Vector omega;        // contraction factors
  Vector step_sizes;   // M
  Vector gradient_at_target;  // b_i = ||grad_{2K} f_i(x*)||
  Vector participation;       // P; empty means every node always participates
  Matrix combination;  // A
  double gain = 2.0;   // 2 for DiFIGHT, 4 for MoDiFIGHT

  int nodes() const { return static_cast<int>(omega.size()); }
  void validate() const;
};

struct StabilityConditions {
  double weighted_max = 0.0;  // max_i of the row sums of the weighted matrix
  double omega_max = 0.0;     // max_j omega_j
  double threshold = 0.0;     // 1 / gain
  bool weighted_holds() const { return weighted_max < threshold; }
  bool omega_holds() const { return omega_max < threshold; }
};

struct BoundReport {
  bool stable = false;
  double spectral_radius = 0.0;
  StabilityConditions conditions;
  Matrix iteration_matrix;             // gain A^T Omega, or B Omega
  std::optional<Vector> limit_bound;   // present iff stable
};

/// h^{n+1} <= g A^T Omega h^n + g A^T M b; when g A^T Omega is stable every
/// limit point satisfies h <= g (I - g A^T Omega)^{-1} A^T M b.
BoundReport deterministic_bound(const BoundContext& context);

/// With B = g (I - P + P A^T): limsup E[h^n] <= (I - B Omega)^{-1} B M b when
/// B Omega is stable.
BoundReport randomized_bound(const BoundContext& context);

struct Lemma3Report {
  Vector final_iterate;
  Vector limit;            // (I - B)^{-1} b
  Vector stated_limit;     // (I - B)^{-1} B b
  double max_violation = 0.0;  // worst late-iterate excess over `limit`
  double final_gap = 0.0;      // ||final - limit||_inf
  bool holds = false;
};

/// Runs u^{n+1} = B u^n + b, the extremal sequence of u^{n+1} <= B u^n + b,
/// and checks the last quarter of iterates against (I - B)^{-1} b.
/// Throws InvalidArgument unless B is stable and all inputs nonnegative.
Lemma3Report check_lemma3(const Matrix& b_matrix, const Vector& b, const Vector& u0, int steps,
                          double tolerance = 1e-8);

struct EmpiricalReport {
  std::string verdict;  // "verified", "exceeded", or "condition violated"
  bool condition_holds = false;
  int runs = 0;
  Vector empirical;     // per-node late-iterate error (averaged across runs)
  std::optional<Vector> bound;
  double max_excess = 0.0;
  bool passed() const { return verdict == "verified"; }
};

/// Compares late iterates of h^n with the limit bound. Deterministic traces
/// use the minimum over the last `late_fraction` of each trace; randomized
/// traces are averaged across runs first. Report only, never throws on a miss.
EmpiricalReport empirical_vs_theoretical(std::span<const RunTrace> traces,
                                         const BoundContext& context, bool randomized,
                                         double tolerance = 1e-9, double late_fraction = 0.1);

/// Per-step check of the error recursion with curvature evaluated exactly on
/// each support union visited by the iteration.
struct RecursionStepReport {
  Vector lhs;    // h^{n+1}
  Vector rhs;    // g A^T (Omega_n h^n + M b)
  Vector omega;  // per-node factor used this step
  double max_excess = 0.0;
  bool holds(double tolerance = 1e-9) const { return max_excess <= tolerance; }
};

RecursionStepReport check_error_recursion(const Network& network,
                                          std::span<const LeastSquaresCost> costs,
                                          const Vector& x_star, std::span<const double> step_sizes,
                                          Index sparsity, AlgorithmKind kind,
                                          std::span<const Vector> before,
                                          std::span<const Vector> after);

/// Builds Omega, M and b from node costs. `curvature` holds order-3K bounds
/// per node; `strategy` fills P when given.
BoundContext make_bound_context(const Network& network, std::span<const LeastSquaresCost> costs,
                                const Vector& x_star, std::span<const double> step_sizes,
                                std::span<const CurvatureBounds> curvature, Index sparsity,
                                AlgorithmKind kind,
                                const std::optional<SelectionStrategy>& strategy = std::nullopt);

}  // namespace difight
