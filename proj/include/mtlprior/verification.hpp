#pragma once

#include <vector>

#include "mtlprior/solvers.hpp"

namespace mtlprior {

// Numerical predicates for the descent lemmas and rate theorems. Every
// inequality is checked with an additive slack of `slack_factor * scale`.

inline constexpr double kLemmaSlack = 1e-9;
inline constexpr double kTheoremSlack = 1e-8;
inline constexpr double kLemma3Relative = 1e-12;

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = false;
};

/// If F(prox) <= M_{P,eta}(prox) for prox = prox_step(P, eta), then for any A
///   F(A) - F(prox) >= eta/2 |prox - P|^2 + eta <P - A, prox - P>.
/// Throws InapplicablePrecondition when the majorization test fails at P.
InequalityCheck check_lemma1(const ProblemInstance& instance, const CoefficientMatrix& A,
                             const CoefficientMatrix& P, double eta,
                             double slack_factor = kLemmaSlack);

/// Given f(prox_a(y)) <= f(y) + <grad f(y), prox_a(y) - y> + a/2 |prox_a(y) - y|^2,
///   F(x) - F(prox_a(y)) >= a/2 |x - prox_a(y)|^2 - a/2 |x - y|^2
///                          + f(x) - f(y) - <grad f(y), x - y>.
InequalityCheck check_lemma2(const ProblemInstance& instance, const CoefficientMatrix& x,
                             const CoefficientMatrix& y, double alpha,
                             double slack_factor = kLemmaSlack);

/// Strongly convex form used by the linear-rate argument: the Bregman term is
/// replaced by its lower bound sigma/2 |x - y|^2.
InequalityCheck check_lemma2_strongly_convex(const ProblemInstance& instance,
                                             const CoefficientMatrix& x,
                                             const CoefficientMatrix& y, double alpha,
                                             double sigma, double slack_factor = kLemmaSlack);

/// |a + b|^2 - beta |a|^2 = (1 - beta) |a + b / (1 - beta)|^2 - beta / (1 - beta) |b|^2.
/// The relative error is measured against the magnitude of the largest term.
/// Throws InvalidArgument when beta >= 1.
InequalityCheck check_lemma3(const Vector& a, const Vector& b, double beta,
                             double relative_tolerance = kLemma3Relative);

struct ReferenceOptimum {
  CoefficientMatrix P;
  double F = 0.0;
};

inline constexpr int kReferenceIterations = 100000;
inline constexpr double kReferenceTolerance = 1e-14;

/// F* estimate: fista-backtracking for `iterations` or until the objective
/// change drops below 1e-14; the best iterate seen is returned.
ReferenceOptimum estimate_optimum(const ProblemInstance& instance,
                                  int iterations = kReferenceIterations);

struct ConvergenceCertificate {
  double reference_optimum_F = 0.0;
  CoefficientMatrix reference_P;
  std::vector<double> V_trace;      // F(P^k) - F*
  std::vector<double> bound_trace;  // bound at k; +inf where no bound applies
  std::vector<double> lyapunov_trace;        // empty unless iterates were recorded
  std::vector<double> lyapunov_bound_trace;  // idem
  double slack = 0.0;
  bool satisfied = false;
  double max_violation = 0.0;  // max_k (V_k - bound_k), may be negative
};

/// V_k <= beta L |P* - P^0|^2 / (2k) for k >= 1 with beta = max_k eta_k / L.
ConvergenceCertificate check_sublinear_bound(const SolverResult& result,
                                             const ReferenceOptimum& reference, double L,
                                             double slack_factor = kTheoremSlack);

/// V_k <= (1 - 1/t)^k (V_0 + sigma/2 |P^0 - P*|^2) with t = sqrt(L / sigma).
/// When the result carries its iterates, the Lyapunov quantity
///   V_k + sigma/2 |t P^k - (P* + (t - 1) P^{k-1})|^2
/// is checked against the same geometric bound as well.
ConvergenceCertificate check_linear_bound(const SolverResult& result,
                                          const ReferenceOptimum& reference, double L,
                                          double sigma, double slack_factor = kTheoremSlack);

}  // namespace mtlprior
