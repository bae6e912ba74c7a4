#include "difight/analysis.hpp"

#include "difight/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace difight {

namespace {

void check_square(const Matrix& x, const char* what) {
  if (x.rows() != x.cols()) throw InvalidArgument(std::string(what) + " must be square");
}

// Nodes reachable from 0 following nonzero entries (row -> col), or the
// reverse direction when `transpose` is set.
std::vector<char> reachable_from_zero(const Matrix& x, bool transpose) {
  const Index n = x.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index v = 0; v < n; ++v) {
      const double entry = transpose ? x(v, u) : x(u, v);
      if (entry != 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

Vector solve_stable(const Matrix& iteration, const Vector& rhs) {
  const Index n = iteration.rows();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(n, n) - iteration);
  if (!lu.isInvertible()) {
    throw InternalError("I - iteration matrix is singular although declared stable");
  }
  return lu.solve(rhs);
}

Vector participation_or_ones(const BoundContext& context) {
  return context.participation.size() == 0 ? Vector::Ones(context.nodes())
                                           : context.participation;
}

}  // namespace

bool is_irreducible(const Matrix& x) {
  check_square(x, "matrix");
  if ((x.array() < 0.0).any()) throw InvalidArgument("irreducibility needs a nonnegative matrix");
  const Index n = x.rows();
  if (n == 0) return false;
  if (n == 1) return x(0, 0) > 0.0;
  const auto forward = reachable_from_zero(x, false);
  const auto backward = reachable_from_zero(x, true);
  return std::all_of(forward.begin(), forward.end(), [](char c) { return c != 0; }) &&
         std::all_of(backward.begin(), backward.end(), [](char c) { return c != 0; });
}

double spectral_radius_dense(const Matrix& x) {
  check_square(x, "matrix");
  if (x.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(x, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double second_eigenvalue_magnitude(const Matrix& x) {
  check_square(x, "matrix");
  if (x.rows() < 2) return 0.0;
  Eigen::EigenSolver<Matrix> solver(x, false);
  Vector mags = solver.eigenvalues().cwiseAbs();
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags[1];
}

SpectralResult spectral_radius(const Matrix& x, const SpectralOptions& options) {
  check_square(x, "matrix");
  const Index n = x.rows();
  SpectralResult result;
  if (n == 0) return result;

  double residual = std::numeric_limits<double>::infinity();
  if ((x.array() >= 0.0).all()) {
    const double scale = x.rowwise().sum().maxCoeff();
    if (scale == 0.0) return result;
    // The shift makes every irreducible input primitive without moving the
    // Perron vector; ratios of (X + sI)v to v bracket r + s.
    const double shift = 0.5 * scale;
    Vector v = Vector::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 1; it <= options.max_iterations; ++it) {
      const Vector w = x * v + shift * v;
      const Vector ratio = w.cwiseQuotient(v);
      const double lo = ratio.minCoeff();
      const double hi = ratio.maxCoeff();
      v = w / w.sum();
      if (!(v.array() > 0.0).all()) break;
      if (hi - lo <= options.tolerance * hi) {
        result.radius = 0.5 * (lo + hi) - shift;
        result.iterations = it;
        result.residual = (x * v - result.radius * v).lpNorm<Eigen::Infinity>();
        result.perron_vector = v;
        return result;
      }
      residual = hi - lo;
    }
  }

  if (n > options.dense_fallback_limit) {
    throw NumericError("spectral radius did not converge; Collatz-Wielandt gap " +
                           std::to_string(residual),
                       residual);
  }
  result.radius = spectral_radius_dense(x);
  result.iterations = options.max_iterations;
  result.residual = residual;
  result.dense_fallback = true;
  return result;
}

void BoundContext::validate() const {
  const Index n = omega.size();
  if (step_sizes.size() != n || gradient_at_target.size() != n || combination.rows() != n ||
      combination.cols() != n) {
    throw InvalidArgument("bound context dimensions disagree");
  }
  if (participation.size() != 0 && participation.size() != n) {
    throw InvalidArgument("participation vector has the wrong length");
  }
  if ((omega.array() < 0.0).any() || (step_sizes.array() < 0.0).any() ||
      (gradient_at_target.array() < 0.0).any() || (combination.array() < 0.0).any()) {
    throw InvalidArgument("bound context entries must be nonnegative");
  }
  if (participation.size() != 0 &&
      ((participation.array() < 0.0).any() || (participation.array() > 1.0).any())) {
    throw InvalidArgument("participation probabilities must lie in [0, 1]");
  }
  if (gain != 2.0 && gain != 4.0) throw InvalidArgument("recursion gain must be 2 or 4");
}

BoundReport deterministic_bound(const BoundContext& context) {
  context.validate();
  const Matrix weighted = context.combination.transpose() * context.omega.asDiagonal();
  BoundReport report;
  report.conditions.weighted_max = weighted.rowwise().sum().maxCoeff();
  report.conditions.omega_max = context.omega.maxCoeff();
  report.conditions.threshold = 1.0 / context.gain;
  report.iteration_matrix = context.gain * weighted;
  report.spectral_radius = spectral_radius(report.iteration_matrix).radius;
  report.stable = report.spectral_radius < 1.0;
  if (report.stable) {
    const Vector drive = context.gain * (context.combination.transpose() *
                                         context.step_sizes.cwiseProduct(context.gradient_at_target));
    report.limit_bound = solve_stable(report.iteration_matrix, drive);
  }
  return report;
}

BoundReport randomized_bound(const BoundContext& context) {
  context.validate();
  const Index n = context.nodes();
  const Vector pi = participation_or_ones(context);
  const Matrix mixing = context.gain * (Matrix::Identity(n, n) - Matrix(pi.asDiagonal()) +
                                        pi.asDiagonal() * context.combination.transpose());
  BoundReport report;
  const Vector neighbor_omega = context.combination.transpose() * context.omega;
  report.conditions.weighted_max =
      (context.omega.cwiseProduct(Vector::Ones(n) - pi) + pi.cwiseProduct(neighbor_omega))
          .maxCoeff();
  report.conditions.omega_max = context.omega.maxCoeff();
  report.conditions.threshold = 1.0 / context.gain;
  report.iteration_matrix = mixing * context.omega.asDiagonal();
  report.spectral_radius = spectral_radius(report.iteration_matrix).radius;
  report.stable = report.spectral_radius < 1.0;
  if (report.stable) {
    const Vector drive = mixing * context.step_sizes.cwiseProduct(context.gradient_at_target);
    report.limit_bound = solve_stable(report.iteration_matrix, drive);
  }
  return report;
}

Lemma3Report check_lemma3(const Matrix& b_matrix, const Vector& b, const Vector& u0, int steps,
                          double tolerance) {
  check_square(b_matrix, "B");
  const Index n = b_matrix.rows();
  if (b.size() != n || u0.size() != n) throw InvalidArgument("lemma 3 vectors have wrong length");
  if ((b_matrix.array() < 0.0).any() || (b.array() < 0.0).any() || (u0.array() < 0.0).any()) {
    throw InvalidArgument("lemma 3 inputs must be nonnegative");
  }
  if (steps < 1) throw InvalidArgument("lemma 3 needs at least one step");
  if (spectral_radius(b_matrix).radius >= 1.0) {
    throw InvalidArgument("lemma 3 precondition violated: B is not stable");
  }

  Lemma3Report report;
  report.limit = solve_stable(b_matrix, b);
  report.stated_limit = solve_stable(b_matrix, b_matrix * b);
  report.max_violation = -std::numeric_limits<double>::infinity();
  const int late_start = steps - steps / 4;
  Vector u = u0;
  for (int step = 1; step <= steps; ++step) {
    u = b_matrix * u + b;
    if (step >= late_start) {
      report.max_violation = std::max(report.max_violation, (u - report.limit).maxCoeff());
    }
  }
  report.final_iterate = u;
  report.final_gap = (u - report.limit).lpNorm<Eigen::Infinity>();
  report.holds = report.max_violation <= tolerance;
  return report;
}

EmpiricalReport empirical_vs_theoretical(std::span<const RunTrace> traces,
                                         const BoundContext& context, bool randomized,
                                         double tolerance, double late_fraction) {
  EmpiricalReport report;
  report.runs = static_cast<int>(traces.size());
  const BoundReport bound = randomized ? randomized_bound(context) : deterministic_bound(context);
  report.condition_holds = bound.stable;
  report.bound = bound.limit_bound;
  if (!bound.stable) {
    report.verdict = "condition violated";
    return report;
  }
  if (traces.empty()) throw InvalidArgument("no traces to compare");

  const Index n = context.nodes();
  std::size_t length = 0;
  for (const auto& t : traces) {
    if (t.nodes() != n) throw InvalidArgument("trace node count does not match the context");
    length = std::max(length, t.errors.size());
  }
  const auto late = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(late_fraction * static_cast<double>(length))));
  const std::size_t start = length - late;
  // Shorter traces stopped at a fixed point, so their last state persists.
  const auto error_at = [](const RunTrace& t, std::size_t k) -> const Vector& {
    return t.errors[std::min(k, t.errors.size() - 1)];
  };

  if (randomized) {
    report.empirical = Vector::Zero(n);
    for (std::size_t k = start; k < length; ++k) {
      Vector mean = Vector::Zero(n);
      for (const auto& t : traces) mean += error_at(t, k);
      mean /= static_cast<double>(traces.size());
      report.empirical = report.empirical.cwiseMax(mean);
    }
  } else {
    report.empirical = Vector::Zero(n);
    for (const auto& t : traces) {
      Vector low = error_at(t, start);
      for (std::size_t k = start; k < length; ++k) low = low.cwiseMin(error_at(t, k));
      report.empirical += low;
    }
    report.empirical /= static_cast<double>(traces.size());
  }
  report.max_excess = (report.empirical - *report.bound).maxCoeff();
  report.verdict = report.max_excess <= tolerance ? "verified" : "exceeded";
  return report;
}

RecursionStepReport check_error_recursion(const Network& network,
                                          std::span<const LeastSquaresCost> costs,
                                          const Vector& x_star, std::span<const double> step_sizes,
                                          Index sparsity, AlgorithmKind kind,
                                          std::span<const Vector> before,
                                          std::span<const Vector> after) {
  const int nodes = network.size();
  const auto count = static_cast<std::size_t>(nodes);
  if (costs.size() != count || step_sizes.size() != count || before.size() != count ||
      after.size() != count) {
    throw InvalidArgument("recursion check needs one entry per node");
  }
  const double gain = recursion_gain(kind);
  const Index n = x_star.size();
  const SupportSet target = SupportSet::of(x_star);
  const Matrix& a = network.combination();

  Vector b(nodes);
  Vector mu(nodes);
  Vector omega = Vector::Zero(nodes);
  for (int j = 0; j < nodes; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    mu[j] = step_sizes[jj];
    b[j] = top_k_gradient_norm(costs[jj].gradient(x_star), std::min<Index>(2 * sparsity, n));
    const SupportSet own = SupportSet::of(before[jj]).united(target);
    if (kind == AlgorithmKind::MoDiFIGHT) {
      const Vector psi = hard_threshold_values(
          before[jj] - step_sizes[jj] * costs[jj].gradient(before[jj]), sparsity);
      const auto bounds = support_curvature(costs[jj], own.united(SupportSet::of(psi)));
      omega[j] = contraction_factor(bounds, step_sizes[jj]).omega;
    } else {
      for (int i = 0; i < nodes; ++i) {
        if (a(j, i) == 0.0) continue;
        const auto bounds =
            support_curvature(costs[jj], own.united(SupportSet::of(after[static_cast<std::size_t>(i)])));
        omega[j] = std::max(omega[j], contraction_factor(bounds, step_sizes[jj]).omega);
      }
    }
  }

  RecursionStepReport report;
  report.omega = omega;
  report.lhs = error_norms(after, x_star);
  const Vector h = error_norms(before, x_star);
  report.rhs = gain * (a.transpose() * (omega.cwiseProduct(h) + mu.cwiseProduct(b)));
  report.max_excess = (report.lhs - report.rhs).maxCoeff();
  return report;
}

BoundContext make_bound_context(const Network& network, std::span<const LeastSquaresCost> costs,
                                const Vector& x_star, std::span<const double> step_sizes,
                                std::span<const CurvatureBounds> curvature, Index sparsity,
                                AlgorithmKind kind,
                                const std::optional<SelectionStrategy>& strategy) {
  const int nodes = network.size();
  const auto count = static_cast<std::size_t>(nodes);
  if (costs.size() != count || step_sizes.size() != count || curvature.size() != count) {
    throw InvalidArgument("bound context needs one cost, step size and bound per node");
  }
  BoundContext context;
  context.omega.resize(nodes);
  context.step_sizes.resize(nodes);
  context.gradient_at_target.resize(nodes);
  const Index order = std::min<Index>(2 * sparsity, x_star.size());
  for (std::size_t i = 0; i < count; ++i) {
    const auto k = static_cast<Index>(i);
    context.omega[k] = contraction_factor(curvature[i], step_sizes[i]).omega;
    context.step_sizes[k] = step_sizes[i];
    context.gradient_at_target[k] = top_k_gradient_norm(costs[i].gradient(x_star), order);
  }
  context.combination = network.combination();
  context.gain = recursion_gain(kind);
  if (strategy) {
    const auto pi = participation_probabilities(*strategy, network);
    context.participation = Eigen::Map<const Vector>(pi.data(), static_cast<Index>(pi.size()));
  }
  return context;
}

}  // namespace difight
