#include "mtlprior/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtlprior/prox.hpp"

namespace mtlprior {

namespace {

double inner(const CoefficientMatrix& a, const CoefficientMatrix& b) {
  return a.cwiseProduct(b).sum();
}

double lemma_scale(std::initializer_list<double> objectives) {
  double largest = 0.0;
  for (double v : objectives) largest = std::max(largest, std::abs(v));
  return 1.0 + largest;
}

void require_reference(const ReferenceOptimum& reference, const SolverResult& result) {
  if (reference.P.size() == 0 || reference.P.rows() != result.initial_P.rows() ||
      reference.P.cols() != result.initial_P.cols() || !std::isfinite(reference.F)) {
    throw Error(ErrorKind::MissingReference, "reference optimum is missing or has the wrong shape");
  }
  if (result.objective_trace.empty()) {
    throw Error(ErrorKind::InvalidArgument, "solver result has an empty objective trace");
  }
}

void finalize(ConvergenceCertificate& cert) {
  cert.max_violation = -std::numeric_limits<double>::infinity();
  auto scan = [&cert](const std::vector<double>& values, const std::vector<double>& bounds) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (std::isinf(bounds[k])) continue;
      cert.max_violation = std::max(cert.max_violation, values[k] - bounds[k]);
    }
  };
  scan(cert.V_trace, cert.bound_trace);
  scan(cert.lyapunov_trace, cert.lyapunov_bound_trace);
  cert.satisfied = cert.max_violation <= cert.slack;
}

}  // namespace

InequalityCheck check_lemma1(const ProblemInstance& instance, const CoefficientMatrix& A,
                             const CoefficientMatrix& P, double eta, double slack_factor) {
  const CoefficientMatrix next = prox_step(instance, P, eta);
  const double F_next = eval_full(instance, next);
  const double F_A = eval_full(instance, A);
  const double scale = lemma_scale({F_A, F_next, eval_full(instance, P)});
  const double slack = slack_factor * scale;

  if (F_next > majorization_value(instance, P, next, eta) + slack) {
    throw Error(ErrorKind::InapplicablePrecondition,
                "F(prox) exceeds M_{P,eta}(prox) at eta = " + std::to_string(eta));
  }
  const CoefficientMatrix step = next - P;
  InequalityCheck check;
  check.lhs = F_A - F_next;
  check.rhs = 0.5 * eta * step.squaredNorm() + eta * inner(P - A, step);
  check.slack = slack;
  check.holds = check.lhs >= check.rhs - slack;
  return check;
}

namespace {

InequalityCheck lemma2_impl(const ProblemInstance& instance, const CoefficientMatrix& x,
                            const CoefficientMatrix& y, double alpha,
                            const double* sigma, double slack_factor) {
  const CoefficientMatrix grad_y = grad_smooth(instance, y);
  const CoefficientMatrix next = prox_step_from_gradient(instance.params, y, grad_y, alpha);
  const double f_y = eval_smooth(instance, y);
  const double f_x = eval_smooth(instance, x);
  const double f_next = eval_smooth(instance, next);
  const double F_x = f_x + eval_nonsmooth(instance.params, x);
  const double F_next = f_next + eval_nonsmooth(instance.params, next);
  const double scale = lemma_scale({F_x, F_next, f_y});
  const double slack = slack_factor * scale;

  const CoefficientMatrix step = next - y;
  if (f_next > f_y + inner(grad_y, step) + 0.5 * alpha * step.squaredNorm() + slack) {
    throw Error(ErrorKind::InapplicablePrecondition,
                "smooth descent condition fails at alpha = " + std::to_string(alpha));
  }
  const CoefficientMatrix xy = x - y;
  const double curvature =
      sigma ? 0.5 * (*sigma) * xy.squaredNorm() : f_x - f_y - inner(grad_y, xy);
  InequalityCheck check;
  check.lhs = F_x - F_next;
  check.rhs = 0.5 * alpha * (x - next).squaredNorm() - 0.5 * alpha * xy.squaredNorm() + curvature;
  check.slack = slack;
  check.holds = check.lhs >= check.rhs - slack;
  return check;
}

}  // namespace

InequalityCheck check_lemma2(const ProblemInstance& instance, const CoefficientMatrix& x,
                             const CoefficientMatrix& y, double alpha, double slack_factor) {
  return lemma2_impl(instance, x, y, alpha, nullptr, slack_factor);
}

InequalityCheck check_lemma2_strongly_convex(const ProblemInstance& instance,
                                             const CoefficientMatrix& x,
                                             const CoefficientMatrix& y, double alpha,
                                             double sigma, double slack_factor) {
  return lemma2_impl(instance, x, y, alpha, &sigma, slack_factor);
}

InequalityCheck check_lemma3(const Vector& a, const Vector& b, double beta,
                             double relative_tolerance) {
  if (!(beta < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "beta must be < 1, got " + std::to_string(beta));
  }
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "a and b differ in length");
  }
  const double one_minus = 1.0 - beta;
  const double first = one_minus * (a + b / one_minus).squaredNorm();
  const double second = beta / one_minus * b.squaredNorm();
  InequalityCheck check;
  check.lhs = (a + b).squaredNorm() - beta * a.squaredNorm();
  check.rhs = first - second;
  const double magnitude = std::max({std::abs(check.lhs), std::abs(first), std::abs(second),
                                     (a + b).squaredNorm(), std::abs(beta) * a.squaredNorm()});
  check.slack = relative_tolerance * magnitude;
  check.holds = std::abs(check.lhs - check.rhs) <= check.slack;
  return check;
}

ReferenceOptimum estimate_optimum(const ProblemInstance& instance, int iterations) {
  SolverConfig config;
  config.algorithm = Algorithm::FistaBacktracking;
  config.max_iterations = iterations;
  config.objective_tolerance = kReferenceTolerance;
  const SolverResult result = solve_fista_backtracking(instance, config);
  return {result.best_P, result.best_objective};
}

ConvergenceCertificate check_sublinear_bound(const SolverResult& result,
                                             const ReferenceOptimum& reference, double L,
                                             double slack_factor) {
  require_reference(reference, result);
  ConvergenceCertificate cert;
  cert.reference_optimum_F = reference.F;
  cert.reference_P = reference.P;
  cert.slack = slack_factor * (1.0 + std::abs(result.objective_trace.front()));

  const double beta = result.max_stepsize_ratio;
  const double distance = (reference.P - result.initial_P).squaredNorm();
  for (std::size_t k = 0; k < result.objective_trace.size(); ++k) {
    cert.V_trace.push_back(result.objective_trace[k] - reference.F);
    cert.bound_trace.push_back(k == 0 ? std::numeric_limits<double>::infinity()
                                      : beta * L * distance / (2.0 * static_cast<double>(k)));
  }
  finalize(cert);
  return cert;
}

ConvergenceCertificate check_linear_bound(const SolverResult& result,
                                          const ReferenceOptimum& reference, double L,
                                          double sigma, double slack_factor) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sigma-nonpositive: sigma = " + std::to_string(sigma));
  }
  require_reference(reference, result);
  ConvergenceCertificate cert;
  cert.reference_optimum_F = reference.F;
  cert.reference_P = reference.P;
  cert.slack = slack_factor * (1.0 + std::abs(result.objective_trace.front()));

  const double t = std::sqrt(L / sigma);
  const double rate = 1.0 - 1.0 / t;
  const double V0 = result.objective_trace.front() - reference.F;
  const double start = V0 + 0.5 * sigma * (result.initial_P - reference.P).squaredNorm();

  double factor = 1.0;
  for (std::size_t k = 0; k < result.objective_trace.size(); ++k) {
    cert.V_trace.push_back(result.objective_trace[k] - reference.F);
    cert.bound_trace.push_back(factor * start);
    factor *= rate;
  }

  const auto& iterates = result.iterates;
  if (iterates.size() == result.objective_trace.size()) {
    factor = 1.0;
    for (std::size_t k = 0; k < iterates.size(); ++k) {
      const CoefficientMatrix& before = k == 0 ? iterates[0] : iterates[k - 1];
      const CoefficientMatrix gap = t * iterates[k] - (reference.P + (t - 1.0) * before);
      cert.lyapunov_trace.push_back(cert.V_trace[k] + 0.5 * sigma * gap.squaredNorm());
      cert.lyapunov_bound_trace.push_back(factor * start);
      factor *= rate;
    }
  }
  finalize(cert);
  return cert;
}

}  // namespace mtlprior
