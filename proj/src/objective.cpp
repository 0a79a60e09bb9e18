#include "mtlprior/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace mtlprior {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::NonPositiveEta, "eta = " + std::to_string(eta) + " must be > 0");
  }
}

double chain_energy(const CoefficientMatrix& P) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < P.cols(); ++i) {
    sum += (P.col(i) - P.col(i + 1)).squaredNorm();
  }
  return sum;
}

}  // namespace

double eval_smooth(const ProblemInstance& instance, const CoefficientMatrix& P) {
  check_coefficients(instance, P);
  const auto& params = instance.params;
  double loss = 0.0;
  for (std::size_t i = 0; i < instance.tasks.size(); ++i) {
    const auto& task = instance.tasks[i];
    loss += (task.features * P.col(static_cast<Eigen::Index>(i)) - task.responses).squaredNorm();
  }
  double value = 0.5 * loss;
  if (instance.prior.constraints() > 0 && params.theta != 0.0) {
    value += 0.5 * params.theta * (instance.prior.rows * P).squaredNorm();
  }
  if (params.epsilon != 0.0) value += 0.5 * params.epsilon * chain_energy(P);
  return value;
}

double eval_nonsmooth(const RegularizationParams& params, const CoefficientMatrix& P) {
  if (params.lambda == 0.0) return 0.0;
  return params.lambda * P.rowwise().norm().sum();
}

double eval_full(const ProblemInstance& instance, const CoefficientMatrix& P) {
  return eval_smooth(instance, P) + eval_nonsmooth(instance.params, P);
}

CoefficientMatrix grad_smooth(const ProblemInstance& instance, const CoefficientMatrix& P) {
  check_coefficients(instance, P);
  const auto& params = instance.params;
  const Eigen::Index m = P.cols();
  CoefficientMatrix grad(P.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& task = instance.tasks[static_cast<std::size_t>(i)];
    grad.col(i).noalias() =
        task.features.transpose() * (task.features * P.col(i) - task.responses);
  }
  if (instance.prior.constraints() > 0 && params.theta != 0.0) {
    const Matrix& D = instance.prior.rows;
    grad.noalias() += params.theta * (D.transpose() * (D * P));
  }
  if (params.epsilon != 0.0 && m > 1) {
    // epsilon * P * (path-graph Laplacian)
    for (Eigen::Index i = 0; i < m; ++i) {
      Vector lap = Vector::Zero(P.rows());
      if (i > 0) lap += P.col(i) - P.col(i - 1);
      if (i + 1 < m) lap += P.col(i) - P.col(i + 1);
      grad.col(i) += params.epsilon * lap;
    }
  }
  return grad;
}

double smooth_curvature(const ProblemInstance& instance, const CoefficientMatrix& delta) {
  check_coefficients(instance, delta);
  const auto& params = instance.params;
  double loss = 0.0;
  for (std::size_t i = 0; i < instance.tasks.size(); ++i) {
    loss += (instance.tasks[i].features * delta.col(static_cast<Eigen::Index>(i))).squaredNorm();
  }
  double value = 0.5 * loss;
  if (instance.prior.constraints() > 0 && params.theta != 0.0) {
    value += 0.5 * params.theta * (instance.prior.rows * delta).squaredNorm();
  }
  if (params.epsilon != 0.0) value += 0.5 * params.epsilon * chain_energy(delta);
  return value;
}

double objective_difference(const ProblemInstance& instance, const CoefficientMatrix& prev,
                            const CoefficientMatrix& next, const CoefficientMatrix& grad_prev) {
  check_coefficients(instance, prev);
  check_coefficients(instance, next);
  check_coefficients(instance, grad_prev);
  const CoefficientMatrix delta = next - prev;
  double change = grad_prev.cwiseProduct(delta).sum() + smooth_curvature(instance, delta);
  const double lambda = instance.params.lambda;
  if (lambda != 0.0) {
    double rows = 0.0;
    for (Eigen::Index j = 0; j < prev.rows(); ++j) {
      const double a = next.row(j).norm();
      const double b = prev.row(j).norm();
      if (a + b > 0.0) rows += delta.row(j).dot(next.row(j) + prev.row(j)) / (a + b);
    }
    change += lambda * rows;
  }
  return change;
}

double majorization_value(const ProblemInstance& instance, const CoefficientMatrix& A,
                          const CoefficientMatrix& P, double eta) {
  check_eta(eta);
  check_coefficients(instance, A);
  check_coefficients(instance, P);
  const CoefficientMatrix diff = P - A;
  return eval_smooth(instance, A) + grad_smooth(instance, A).cwiseProduct(diff).sum() +
         0.5 * eta * diff.squaredNorm() + eval_nonsmooth(instance.params, P);
}

EigenEstimate power_largest(const Matrix& A, std::uint64_t seed, double tolerance,
                            int max_iterations) {
  EigenEstimate est;
  const Eigen::Index n = A.rows();
  if (n == 0) {
    est.converged = true;
    return est;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  v.normalize();

  Vector w(n);
  for (int it = 1; it <= max_iterations; ++it) {
    w.noalias() = A * v;
    const double rho = v.dot(w);
    const double residual = (w - rho * v).norm();
    est.value = rho;
    est.residual = residual;
    est.iterations = it;
    if (residual <= tolerance * std::abs(rho)) {
      est.converged = true;
      return est;
    }
    const double norm = w.norm();
    if (norm == 0.0) {
      // v lies in the null space; a PSD matrix with A v = 0 for a random v is zero.
      est.converged = true;
      return est;
    }
    v = w / norm;
  }
  return est;
}

SpectrumBounds extremal_eigenvalues(const Matrix& A, std::uint64_t seed, double tolerance,
                                    int max_iterations) {
  SpectrumBounds bounds;
  bounds.largest = power_largest(A, seed, tolerance, max_iterations);
  bounds.upper = bounds.largest.value + bounds.largest.residual;

  const Matrix shifted = bounds.upper * Matrix::Identity(A.rows(), A.cols()) - A;
  const EigenEstimate gap = power_largest(shifted, seed + 1, tolerance, max_iterations);
  bounds.smallest.value = bounds.upper - gap.value;
  bounds.smallest.residual = gap.residual;
  bounds.smallest.iterations = gap.iterations;
  bounds.smallest.converged = gap.converged;
  bounds.lower = std::max(0.0, bounds.smallest.value - bounds.smallest.residual);
  return bounds;
}

double path_laplacian_top(Eigen::Index m) {
  if (m <= 1) return 0.0;
  const double md = static_cast<double>(m);
  const double s = std::sin((md - 1.0) * std::numbers::pi / (2.0 * md));
  return 4.0 * s * s;
}

std::string_view to_string(ConstantsSource source) {
  return source == ConstantsSource::Paper ? "paper" : "safe";
}

ConstantsSource parse_constants_source(std::string_view text) {
  if (text == "paper") return ConstantsSource::Paper;
  if (text == "safe") return ConstantsSource::Safe;
  throw Error(ErrorKind::InvalidArgument,
              "constants source must be 'paper' or 'safe', got '" + std::string(text) + "'");
}

std::optional<double> SmoothnessConstants::condition(ConstantsSource source) const {
  const double sigma = strong_convexity(source);
  if (!(sigma > 0.0)) return std::nullopt;
  return lipschitz(source) / sigma;
}

SmoothnessConstants compute_constants(const ProblemInstance& instance) {
  SmoothnessConstants c;
  const auto& params = instance.params;
  const Eigen::Index d = instance.dim();

  double smax_upper = 0.0;
  double smin_lower = std::numeric_limits<double>::infinity();
  double smax = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  auto track = [&c](const SpectrumBounds& b) {
    c.eigen_converged = c.eigen_converged && b.largest.converged && b.smallest.converged;
    c.max_eigen_residual =
        std::max({c.max_eigen_residual, b.largest.residual, b.smallest.residual});
  };

  std::uint64_t seed = 0x5eed;
  for (const auto& task : instance.tasks) {
    const Matrix gram = task.features.transpose() * task.features;
    const SpectrumBounds b = extremal_eigenvalues(gram, seed);
    seed += 2;
    track(b);
    c.per_task_smax.push_back(b.largest.value);
    c.per_task_smin.push_back(std::max(0.0, b.smallest.value));
    smax = std::max(smax, b.largest.value);
    smin = std::min(smin, std::max(0.0, b.smallest.value));
    smax_upper = std::max(smax_upper, b.upper);
    smin_lower = std::min(smin_lower, b.lower);
  }

  double dmax_upper = 0.0;
  double dmin_lower = 0.0;
  if (instance.prior.constraints() > 0) {
    const Matrix dtd = instance.prior.rows.transpose() * instance.prior.rows;
    const SpectrumBounds b = extremal_eigenvalues(dtd, seed);
    track(b);
    c.d_max = b.largest.value;
    c.d_min = std::max(0.0, b.smallest.value);
    dmax_upper = b.upper;
    dmin_lower = b.lower;
  } else if (d > 0) {
    // D^T D is the d x d zero matrix.
    c.d_max = c.d_min = 0.0;
  }

  c.chain_max = path_laplacian_top(instance.num_tasks());

  c.L_paper = smax + params.theta * c.d_max + 2.0 * params.epsilon;
  c.sigma_paper = smin + params.theta * c.d_min + params.epsilon;
  c.L_safe = smax_upper + params.theta * dmax_upper + params.epsilon * c.chain_max;
  c.sigma_safe = smin_lower + params.theta * dmin_lower;
  c.condition_c = c.condition(ConstantsSource::Safe);
  return c;
}

}  // namespace mtlprior
