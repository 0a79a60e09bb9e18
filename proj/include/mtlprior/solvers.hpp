#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtlprior/objective.hpp"

namespace mtlprior {

enum class Algorithm {
  GdConstant,        // fixed eta = L
  IstaModified,      // reverse step search restarting from L every iteration
  IstaBacktracking,  // classic forward search, eta never decreases
  FistaBacktracking,
  LinearMomentum,    // constant momentum (sqrt(c)-1)/(sqrt(c)+1), eta = L
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::GdConstant, Algorithm::IstaModified, Algorithm::IstaBacktracking,
    Algorithm::FistaBacktracking, Algorithm::LinearMomentum};

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

struct SolverConfig {
  Algorithm algorithm = Algorithm::IstaModified;
  int max_iterations = 10000;
  double objective_tolerance = 1e-3;
  double beta_shrink = 0.5;  // modified search shrink factor, in (0, 1)
  double beta_grow = 2.0;    // backtracking grow factor, > 1
  ConstantsSource constants_source = ConstantsSource::Safe;
  std::optional<CoefficientMatrix> initial_P;  // zero matrix when absent
  int search_cap = 60;
  // Starting eta of the classic backtracking baselines; L / 100 when absent.
  std::optional<double> backtracking_eta0;
  // Stop as soon as F(P^k) <= target_objective (used for iteration-count studies).
  std::optional<double> target_objective;
  // Keep every iterate P^0..P^K in the result.
  bool record_iterates = false;
  // Consecutive sub-tolerance objective changes required by the two momentum
  // methods (linear-momentum and fista-backtracking), whose traces need not
  // decrease monotonically.
  int momentum_patience = 3;
};

// The tolerance test compares objective_difference(P^{k-1}, P^k) against
// objective_tolerance rather than the difference of two rounded objective
// values, so small tolerances remain meaningful close to the optimum.

void validate_config(const SolverConfig& config);

enum class Termination { Tolerance, MaxIterations, Stationary, TargetReached };

std::string_view to_string(Termination termination);

struct SolverResult {
  Algorithm algorithm = Algorithm::GdConstant;
  CoefficientMatrix initial_P;
  CoefficientMatrix final_P;
  std::vector<double> objective_trace;  // F(P^k), k = 0..iterations
  std::vector<double> stepsize_trace;   // eta used to produce P^k, k = 1..iterations
  int iterations = 0;
  Termination termination = Termination::MaxIterations;
  double lipschitz = 0.0;           // L of the chosen constants source
  double min_stepsize_ratio = 1.0;  // min_k eta_k / L
  double max_stepsize_ratio = 1.0;  // max_k eta_k / L
  std::vector<CoefficientMatrix> iterates;  // filled when record_iterates is set
  CoefficientMatrix best_P;  // lowest objective seen (latest on ties)
  double best_objective = 0.0;
};

SolverResult solve_gd_constant(const ProblemInstance& instance, const SolverConfig& config);
SolverResult solve_ista_modified(const ProblemInstance& instance, const SolverConfig& config);
SolverResult solve_ista_backtracking(const ProblemInstance& instance,
                                     const SolverConfig& config);
SolverResult solve_fista_backtracking(const ProblemInstance& instance,
                                      const SolverConfig& config);
SolverResult solve_linear_momentum(const ProblemInstance& instance, const SolverConfig& config);

/// Dispatches on config.algorithm.
SolverResult solve(const ProblemInstance& instance, const SolverConfig& config);

/// Reverse step search. Tests eta = beta^i eta0 for i = 1, 2, ... and stops at
/// the first eta whose prox point violates F(prox) <= M_{P_prev,eta}(prox);
/// returns the previous (passing) eta, i.e. eta / beta. If none of the `cap`
/// shrinks violates, the smallest tested eta (beta^cap eta0) is returned.
double search_stepsize_modified(const ProblemInstance& instance, const CoefficientMatrix& P_prev,
                                double eta0, double beta, int cap);

/// FISTA momentum sequence t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.
double fista_next_t(double t);

/// Momentum coefficient (sqrt(c) - 1) / (sqrt(c) + 1) of the linear-rate method.
double linear_momentum_coefficient(double condition);

struct ComparisonEntry {
  Algorithm algorithm = Algorithm::GdConstant;
  std::optional<SolverResult> result;
  std::string error;  // non-empty when the solver failed
};

/// Runs every config on the same instance from the same initial point. A
/// failing solver is recorded in its entry and does not stop the others.
std::vector<ComparisonEntry> run_comparison(const ProblemInstance& instance,
                                            const std::vector<SolverConfig>& configs);

/// One config per algorithm, all copied from `base`.
std::vector<SolverConfig> comparison_configs(const SolverConfig& base);

}  // namespace mtlprior
