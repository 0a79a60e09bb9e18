#include "mtlprior/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "mtlprior/prox.hpp"

namespace mtlprior {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::GdConstant: return "gd-constant";
    case Algorithm::IstaModified: return "ista-modified";
    case Algorithm::IstaBacktracking: return "ista-backtracking";
    case Algorithm::FistaBacktracking: return "fista-backtracking";
    case Algorithm::LinearMomentum: return "linear-momentum";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view text) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == text) return a;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + std::string(text) + "'");
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Tolerance: return "tolerance";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::Stationary: return "stationary";
    case Termination::TargetReached: return "target";
  }
  return "unknown";
}

void validate_config(const SolverConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (config.max_iterations < 1) fail("max_iterations must be >= 1");
  if (!(config.objective_tolerance > 0.0)) fail("objective_tolerance must be > 0");
  if (!(config.beta_shrink > 0.0 && config.beta_shrink < 1.0)) fail("beta_shrink must lie in (0, 1)");
  if (!(config.beta_grow > 1.0)) fail("beta_grow must be > 1");
  if (config.search_cap < 1) fail("search_cap must be >= 1");
  if (config.momentum_patience < 1) fail("momentum_patience must be >= 1");
  if (config.backtracking_eta0 && !(*config.backtracking_eta0 > 0.0)) {
    fail("backtracking_eta0 must be > 0");
  }
}

double fista_next_t(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

double linear_momentum_coefficient(double condition) {
  const double root = std::sqrt(condition);
  return (root - 1.0) / (root + 1.0);
}

namespace {

// F(prox) <= M_{A,eta}(prox) with g cancelled: curvature(delta) <= eta/2 |delta|^2.
double majorization_gap(const ProblemInstance& instance, const CoefficientMatrix& delta,
                        double eta) {
  return smooth_curvature(instance, delta) - 0.5 * eta * delta.squaredNorm();
}

struct Step {
  double eta = 0.0;
  CoefficientMatrix P;
};

Step modified_search(const ProblemInstance& instance, const CoefficientMatrix& A,
                     const CoefficientMatrix& gradient, double eta0, double beta, int cap) {
  Step passing{eta0, {}};
  double eta = eta0;
  for (int i = 1; i <= cap; ++i) {
    eta *= beta;
    CoefficientMatrix P = prox_step_from_gradient(instance.params, A, gradient, eta);
    if (majorization_gap(instance, P - A, eta) > 0.0) {
      if (i == 1) passing.P = prox_step_from_gradient(instance.params, A, gradient, eta0);
      return passing;
    }
    passing = {eta, std::move(P)};
  }
  return passing;
}

Step forward_search(const ProblemInstance& instance, const CoefficientMatrix& A,
                    const CoefficientMatrix& gradient, double start, double grow, int cap) {
  double eta = start;
  double gap = 0.0;
  for (int i = 0; i <= cap; ++i) {
    CoefficientMatrix P = prox_step_from_gradient(instance.params, A, gradient, eta);
    gap = majorization_gap(instance, P - A, eta);
    if (gap <= 0.0) return {eta, std::move(P)};
    if (i < cap) eta *= grow;
  }
  std::ostringstream msg;
  msg << "backtracking did not satisfy the majorization test within " << cap
      << " growth steps; last eta = " << eta << ", residual = " << gap;
  throw Error(ErrorKind::SearchCapExceeded, msg.str());
}

class Run {
 public:
  Run(const ProblemInstance& instance, const SolverConfig& config, Algorithm algorithm,
      int patience = 1)
      : instance_(instance), config_(config), patience_(patience) {
    validate_config(config);
    constants_ = compute_constants(instance);
    result_.algorithm = algorithm;
    result_.lipschitz = constants_.lipschitz(config.constants_source);
    if (!(result_.lipschitz > 0.0)) {
      throw Error(ErrorKind::NonPositiveEta, "Lipschitz constant of f is zero");
    }
    if (config.initial_P) {
      check_coefficients(instance, *config.initial_P);
      result_.initial_P = *config.initial_P;
    } else {
      result_.initial_P = zero_coefficients(instance);
    }
    current_ = result_.initial_P;
    const double objective = eval_full(instance, current_);
    result_.objective_trace.push_back(objective);
    result_.best_objective = objective;
    result_.best_P = current_;
    if (config.record_iterates) result_.iterates.push_back(current_);
  }

  double lipschitz() const { return result_.lipschitz; }
  const SmoothnessConstants& constants() const { return constants_; }
  const CoefficientMatrix& current() const { return current_; }

  // Records P^k obtained by a prox step at `base` with curvature `eta`.
  // `grad_current` is grad f at the current iterate P^{k-1} when the caller
  // already has it. Returns true when the run should stop.
  bool advance(CoefficientMatrix next, const CoefficientMatrix& base, double eta,
               const CoefficientMatrix* grad_current = nullptr) {
    const double change =
        grad_current ? objective_difference(instance_, current_, next, *grad_current)
                     : objective_difference(instance_, current_, next,
                                            grad_smooth(instance_, current_));
    const double objective = eval_full(instance_, next);
    result_.objective_trace.push_back(objective);
    result_.stepsize_trace.push_back(eta);
    ++result_.iterations;
    const bool fixed_point = next == base;
    current_ = std::move(next);
    if (config_.record_iterates) result_.iterates.push_back(current_);
    if (objective <= result_.best_objective) {
      result_.best_objective = objective;
      result_.best_P = current_;
    }

    small_changes_ = std::abs(change) < config_.objective_tolerance ? small_changes_ + 1 : 0;

    if (config_.target_objective && objective <= *config_.target_objective) {
      result_.termination = Termination::TargetReached;
      return true;
    }
    if (fixed_point) {
      result_.termination = Termination::Stationary;
      return true;
    }
    if (small_changes_ >= patience_) {
      result_.termination = Termination::Tolerance;
      return true;
    }
    if (result_.iterations >= config_.max_iterations) {
      result_.termination = Termination::MaxIterations;
      return true;
    }
    return false;
  }

  SolverResult finish() {
    result_.final_P = current_;
    if (!result_.stepsize_trace.empty()) {
      const auto [lo, hi] =
          std::minmax_element(result_.stepsize_trace.begin(), result_.stepsize_trace.end());
      result_.min_stepsize_ratio = *lo / result_.lipschitz;
      result_.max_stepsize_ratio = *hi / result_.lipschitz;
    }
    return std::move(result_);
  }

 private:
  const ProblemInstance& instance_;
  const SolverConfig& config_;
  int patience_;
  SmoothnessConstants constants_;
  SolverResult result_;
  CoefficientMatrix current_;
  int small_changes_ = 0;
};

double backtracking_start(const Run& run, const SolverConfig& config) {
  return config.backtracking_eta0.value_or(run.lipschitz() / 100.0);
}

}  // namespace

double search_stepsize_modified(const ProblemInstance& instance, const CoefficientMatrix& P_prev,
                                double eta0, double beta, int cap) {
  if (!(eta0 > 0.0)) throw Error(ErrorKind::NonPositiveEta, "eta0 must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::InvalidArgument, "beta must lie in (0, 1)");
  if (cap < 1) throw Error(ErrorKind::InvalidArgument, "cap must be >= 1");
  return modified_search(instance, P_prev, grad_smooth(instance, P_prev), eta0, beta, cap).eta;
}

SolverResult solve_gd_constant(const ProblemInstance& instance, const SolverConfig& config) {
  Run run(instance, config, Algorithm::GdConstant);
  const double eta = run.lipschitz();
  for (;;) {
    const CoefficientMatrix A = run.current();
    const CoefficientMatrix gradient = grad_smooth(instance, A);
    if (run.advance(prox_step_from_gradient(instance.params, A, gradient, eta), A, eta,
                    &gradient)) {
      break;
    }
  }
  return run.finish();
}

SolverResult solve_ista_modified(const ProblemInstance& instance, const SolverConfig& config) {
  Run run(instance, config, Algorithm::IstaModified);
  const double eta0 = run.lipschitz();
  for (;;) {
    const CoefficientMatrix A = run.current();
    const CoefficientMatrix gradient = grad_smooth(instance, A);
    Step step = modified_search(instance, A, gradient, eta0, config.beta_shrink, config.search_cap);
    if (run.advance(std::move(step.P), A, step.eta, &gradient)) break;
  }
  return run.finish();
}

SolverResult solve_ista_backtracking(const ProblemInstance& instance,
                                     const SolverConfig& config) {
  Run run(instance, config, Algorithm::IstaBacktracking);
  double eta = backtracking_start(run, config);
  for (;;) {
    const CoefficientMatrix A = run.current();
    const CoefficientMatrix gradient = grad_smooth(instance, A);
    Step step = forward_search(instance, A, gradient, eta, config.beta_grow, config.search_cap);
    eta = step.eta;
    if (run.advance(std::move(step.P), A, eta, &gradient)) break;
  }
  return run.finish();
}

SolverResult solve_fista_backtracking(const ProblemInstance& instance,
                                      const SolverConfig& config) {
  Run run(instance, config, Algorithm::FistaBacktracking, config.momentum_patience);
  double eta = backtracking_start(run, config);
  double t = 1.0;
  CoefficientMatrix Y = run.current();
  for (;;) {
    const CoefficientMatrix previous = run.current();
    Step step = forward_search(instance, Y, grad_smooth(instance, Y), eta, config.beta_grow,
                               config.search_cap);
    eta = step.eta;
    const double t_next = fista_next_t(t);
    CoefficientMatrix next_Y = step.P + ((t - 1.0) / t_next) * (step.P - previous);
    t = t_next;
    if (run.advance(std::move(step.P), Y, eta)) break;
    Y = std::move(next_Y);
  }
  return run.finish();
}

SolverResult solve_linear_momentum(const ProblemInstance& instance, const SolverConfig& config) {
  Run run(instance, config, Algorithm::LinearMomentum, config.momentum_patience);
  const auto condition = run.constants().condition(config.constants_source);
  if (!condition) {
    throw Error(ErrorKind::StrongConvexityUnavailable,
                "strong-convexity constant is zero (" +
                    std::string(to_string(config.constants_source)) + " constants)");
  }
  const double momentum = linear_momentum_coefficient(*condition);
  const double eta = run.lipschitz();
  CoefficientMatrix A = run.current();
  for (;;) {
    const CoefficientMatrix previous = run.current();
    CoefficientMatrix P = prox_step(instance, A, eta);
    CoefficientMatrix next_A = P + momentum * (P - previous);
    if (run.advance(std::move(P), A, eta)) break;
    A = std::move(next_A);
  }
  return run.finish();
}

SolverResult solve(const ProblemInstance& instance, const SolverConfig& config) {
  switch (config.algorithm) {
    case Algorithm::GdConstant: return solve_gd_constant(instance, config);
    case Algorithm::IstaModified: return solve_ista_modified(instance, config);
    case Algorithm::IstaBacktracking: return solve_ista_backtracking(instance, config);
    case Algorithm::FistaBacktracking: return solve_fista_backtracking(instance, config);
    case Algorithm::LinearMomentum: return solve_linear_momentum(instance, config);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm");
}

std::vector<SolverConfig> comparison_configs(const SolverConfig& base) {
  std::vector<SolverConfig> configs;
  for (Algorithm a : kAllAlgorithms) {
    SolverConfig c = base;
    c.algorithm = a;
    configs.push_back(std::move(c));
  }
  return configs;
}

std::vector<ComparisonEntry> run_comparison(const ProblemInstance& instance,
                                            const std::vector<SolverConfig>& configs) {
  std::vector<ComparisonEntry> entries;
  if (configs.empty()) return entries;
  const auto& shared_start = configs.front().initial_P;
  for (const auto& config : configs) {
    ComparisonEntry entry;
    entry.algorithm = config.algorithm;
    SolverConfig c = config;
    c.initial_P = shared_start;
    try {
      entry.result = solve(instance, c);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace mtlprior
