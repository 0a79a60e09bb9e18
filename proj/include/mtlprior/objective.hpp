#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mtlprior/model.hpp"

namespace mtlprior {

// F(P) = f(P) + g(P) with
//   f(P) = 1/2 sum_i |X_i p_i - y_i|^2 + theta/2 |D P|_F^2
//          + epsilon/2 sum_{i<m} |p_i - p_{i+1}|^2
//   g(P) = lambda sum_rows |p^j|

double eval_smooth(const ProblemInstance& instance, const CoefficientMatrix& P);
double eval_nonsmooth(const RegularizationParams& params, const CoefficientMatrix& P);
double eval_full(const ProblemInstance& instance, const CoefficientMatrix& P);

CoefficientMatrix grad_smooth(const ProblemInstance& instance, const CoefficientMatrix& P);

/// Curvature of f along `delta`: f(A + delta) - f(A) - <grad f(A), delta>.
/// f is quadratic, so this is independent of A and never negative; the step
/// searches use it instead of differencing two nearly equal objective values.
double smooth_curvature(const ProblemInstance& instance, const CoefficientMatrix& delta);

/// F(next) - F(prev) evaluated from the quadratic expansion of f at `prev`
/// (grad_prev = grad f(prev)) and a cancellation-free difference of row norms.
/// Agrees with eval_full(next) - eval_full(prev) in exact arithmetic but stays
/// accurate when the two objective values agree to many digits.
double objective_difference(const ProblemInstance& instance, const CoefficientMatrix& prev,
                            const CoefficientMatrix& next, const CoefficientMatrix& grad_prev);

/// M_{A,eta}(P) = f(A) + <grad f(A), P - A> + eta/2 |P - A|_F^2 + g(P).
double majorization_value(const ProblemInstance& instance, const CoefficientMatrix& A,
                          const CoefficientMatrix& P, double eta);

/// Result of power iteration on a symmetric positive semidefinite matrix.
struct EigenEstimate {
  double value = 0.0;     // Rayleigh quotient at the final iterate
  double residual = 0.0;  // |A v - value v|
  int iterations = 0;
  bool converged = false;
};

struct SpectrumBounds {
  EigenEstimate largest;
  EigenEstimate smallest;
  // largest.value + largest.residual, and max(0, smallest.value - smallest.residual).
  double upper = 0.0;
  double lower = 0.0;
};

inline constexpr double kPowerTolerance = 1e-10;
inline constexpr int kPowerMaxIterations = 10000;

/// Largest eigenvalue of a symmetric PSD matrix by power iteration from a
/// seeded start vector.
EigenEstimate power_largest(const Matrix& A, std::uint64_t seed = 0x5eed,
                            double tolerance = kPowerTolerance,
                            int max_iterations = kPowerMaxIterations);

/// Extremal eigenvalues; the smallest comes from power iteration on
/// (upper * I - A).
SpectrumBounds extremal_eigenvalues(const Matrix& A, std::uint64_t seed = 0x5eed,
                                    double tolerance = kPowerTolerance,
                                    int max_iterations = kPowerMaxIterations);

/// Top eigenvalue of the path-graph Laplacian on m nodes, 4 sin^2((m-1)pi/(2m)).
double path_laplacian_top(Eigen::Index m);

enum class ConstantsSource { Paper, Safe };

std::string_view to_string(ConstantsSource source);
ConstantsSource parse_constants_source(std::string_view text);

struct SmoothnessConstants {
  std::vector<double> per_task_smax;
  std::vector<double> per_task_smin;
  double d_max = 0.0;
  double d_min = 0.0;
  double chain_max = 0.0;

  // max_i smax + theta d_max + 2 eps and min_i smin + theta d_min + eps.
  double L_paper = 0.0;
  double sigma_paper = 0.0;
  // Spectrum-derived bounds on the Hessian of f.
  double L_safe = 0.0;
  double sigma_safe = 0.0;
  std::optional<double> condition_c;  // L_safe / sigma_safe when sigma_safe > 0

  bool eigen_converged = true;
  double max_eigen_residual = 0.0;

  double lipschitz(ConstantsSource source) const {
    return source == ConstantsSource::Paper ? L_paper : L_safe;
  }
  double strong_convexity(ConstantsSource source) const {
    return source == ConstantsSource::Paper ? sigma_paper : sigma_safe;
  }
  std::optional<double> condition(ConstantsSource source) const;
};

SmoothnessConstants compute_constants(const ProblemInstance& instance);

}  // namespace mtlprior
