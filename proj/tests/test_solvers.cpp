#include <doctest.h>

#include <cmath>
#include <random>

#include "mtlprior/objective.hpp"
#include "mtlprior/prox.hpp"
#include "mtlprior/solvers.hpp"
#include "support/oracles.hpp"

using namespace mtlprior;
using doctest::Approx;

namespace {

ProblemInstance scalar_quadratic(double L, double lambda = 0.0) {
  ProblemInstance instance;
  instance.tasks.push_back({Matrix::Constant(1, 1, std::sqrt(L)), Vector::Zero(1), 0});
  instance.prior = PriorMatrix::empty(1);
  instance.params = {lambda, 0, 0};
  return instance;
}

SolverConfig config_for(Algorithm a, double tol = 1e-3, int max_it = 10000) {
  SolverConfig c;
  c.algorithm = a;
  c.objective_tolerance = tol;
  c.max_iterations = max_it;
  return c;
}

bool majorization_holds(const ProblemInstance& instance, const Matrix& A, double eta) {
  const Matrix P = prox_step(instance, A, eta);
  return smooth_curvature(instance, P - A) <= 0.5 * eta * (P - A).squaredNorm();
}

}  // namespace

TEST_CASE("algorithm names") {
  for (Algorithm a : kAllAlgorithms) CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("newton"), Error);
  CHECK(to_string(Termination::MaxIterations) == "max-iterations");
}

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(validate_config(c));
  c.beta_shrink = 1.0;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.beta_grow = 1.0;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.objective_tolerance = 0.0;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.max_iterations = 0;
  CHECK_THROWS_AS(validate_config(c), Error);
}

TEST_CASE("start at the least-squares optimum") {
  std::mt19937_64 rng(1);
  ProblemInstance instance = oracle::random_instance(rng, 4, 3, 10, {0, 0, 0}, 0);
  SolverConfig c = config_for(Algorithm::GdConstant);
  c.initial_P = oracle::direct_solution(instance);
  for (Algorithm a : {Algorithm::GdConstant, Algorithm::IstaModified}) {
    c.algorithm = a;
    const SolverResult r = solve(instance, c);
    CHECK(r.iterations == 1);
    CHECK(r.objective_trace.size() == 2);
    CHECK(std::abs(r.objective_trace[1] - r.objective_trace[0]) <= 1e-12 * (1 + r.objective_trace[0]));
    CHECK(r.termination != Termination::MaxIterations);
  }
}

TEST_CASE("lambda = 0 solutions match the dense linear solve") {
  std::mt19937_64 rng(2);
  const ProblemInstance instance = oracle::random_instance(rng, 5, 3, 12, {0, 1, 1});
  const Matrix direct = oracle::direct_solution(instance);
  for (Algorithm a : kAllAlgorithms) {
    CAPTURE(to_string(a));
    const SolverResult r = solve(instance, config_for(a, 1e-15, 50000));
    CHECK(oracle::relative_error(r.final_P, direct) <= 1e-6);
  }
}

TEST_CASE("traces of monotone methods never increase") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ProblemInstance instance = oracle::random_instance(rng, 6, 3, 8, {1, 1, 1});
    for (Algorithm a : {Algorithm::GdConstant, Algorithm::IstaModified, Algorithm::IstaBacktracking}) {
      const SolverResult r = solve(instance, config_for(a, 1e-8));
      const double slack = 1e-12 * (1 + std::abs(r.objective_trace.front()));
      for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
        CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] + slack);
      }
      CHECK(r.objective_trace.back() == Approx(oracle::full_value(instance, r.final_P)).epsilon(1e-12));
      CHECK(static_cast<int>(r.objective_trace.size()) == r.iterations + 1);
      CHECK(static_cast<int>(r.stepsize_trace.size()) == r.iterations);
    }
  }
}

TEST_CASE("modified search on a scalar quadratic returns L") {
  // sqrt(L) is exact so the boundary case eta = L is evaluated exactly.
  const double L = 4.0;
  const ProblemInstance instance = scalar_quadratic(L);
  const Matrix p = Matrix::Constant(1, 1, 1.7);
  CHECK(search_stepsize_modified(instance, p, L, 0.5, 60) == L);
  CHECK(search_stepsize_modified(instance, p, L, 0.5, 1) == L);
  // Starting well above L, the search walks down to the last passing grid point.
  CHECK(search_stepsize_modified(instance, p, 16 * L, 0.5, 60) == L);
  CHECK(search_stepsize_modified(instance, p, 5 * L, 0.5, 60) == Approx(5 * L / 4));
}

TEST_CASE("modified search cap exhaustion returns the smallest tested step") {
  // Zero curvature: every step passes the majorization test.
  ProblemInstance instance = scalar_quadratic(1.0, 0.0);
  instance.tasks[0].features(0, 0) = 0.0;
  instance.tasks[0].responses(0) = 1.0;
  const Matrix p = Matrix::Constant(1, 1, 0.0);
  CHECK(search_stepsize_modified(instance, p, 8.0, 0.5, 3) == 1.0);
  CHECK_THROWS_AS(search_stepsize_modified(instance, p, 1.0, 1.5, 3), Error);
}

TEST_CASE("returned steps satisfy the majorization test") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const ProblemInstance instance = oracle::random_instance(rng, 6, 4, 5, {0.5, 1, 1});
    const double L = compute_constants(instance).L_safe;
    const Matrix P = oracle::gaussian(rng, 6, 4);
    const double eta = search_stepsize_modified(instance, P, L, 0.5, 60);
    CHECK(eta <= L);
    CHECK(majorization_holds(instance, P, eta));
  }
}

TEST_CASE("ista-modified step sizes") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const ProblemInstance instance = oracle::random_instance(rng, 8, 4, 6, {1, 1, 1});
    SolverConfig c = config_for(Algorithm::IstaModified, 1e-9);
    c.record_iterates = true;
    const SolverResult r = solve(instance, c);
    const double L = r.lipschitz;
    for (std::size_t k = 0; k < r.stepsize_trace.size(); ++k) {
      const double eta = r.stepsize_trace[k];
      CHECK(eta <= L);
      CHECK(eta >= std::pow(c.beta_shrink, c.search_cap) * L);
      const double exponent = std::log(eta / L) / std::log(c.beta_shrink);
      CHECK(exponent == Approx(std::round(exponent)).epsilon(1e-9));
      CHECK(majorization_holds(instance, r.iterates[k], eta));
    }
    CHECK(r.max_stepsize_ratio <= 1.0);
    CHECK(r.min_stepsize_ratio > 0.0);
  }
}

TEST_CASE("ista-backtracking") {
  SUBCASE("accepts the initial step when it already majorizes") {
    const ProblemInstance instance = scalar_quadratic(2.0);
    SolverConfig c = config_for(Algorithm::IstaBacktracking, 1e-12);
    c.initial_P = Matrix::Constant(1, 1, 1.0);
    c.backtracking_eta0 = 3.0;
    const SolverResult r = solve(instance, c);
    for (double eta : r.stepsize_trace) CHECK(eta == 3.0);
  }
  SUBCASE("step never decreases and always majorizes") {
    std::mt19937_64 rng(6);
    const ProblemInstance instance = oracle::random_instance(rng, 8, 4, 6, {1, 1, 1});
    SolverConfig c = config_for(Algorithm::IstaBacktracking, 1e-9);
    c.record_iterates = true;
    const SolverResult r = solve(instance, c);
    for (std::size_t k = 1; k < r.stepsize_trace.size(); ++k) {
      CHECK(r.stepsize_trace[k] >= r.stepsize_trace[k - 1]);
    }
    for (std::size_t k = 0; k < r.stepsize_trace.size(); ++k) {
      CHECK(majorization_holds(instance, r.iterates[k], r.stepsize_trace[k]));
    }
  }
  SUBCASE("search cap") {
    const ProblemInstance instance = scalar_quadratic(1e6);
    SolverConfig c = config_for(Algorithm::IstaBacktracking);
    c.initial_P = Matrix::Constant(1, 1, 1.0);
    c.backtracking_eta0 = 1.0;
    c.search_cap = 3;
    try {
      solve(instance, c);
      FAIL("expected a search-cap error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SearchCapExceeded);
      CHECK(std::string(e.what()).find("last eta") != std::string::npos);
    }
  }
}

TEST_CASE("fista momentum sequence") {
  CHECK(fista_next_t(1.0) == Approx((1 + std::sqrt(5.0)) / 2));
  double t = 1.0;
  for (int k = 1; k < 50; ++k) {
    const double next = fista_next_t(t);
    CHECK(next * next - next == Approx(t * t).epsilon(1e-12));
    CHECK(next >= t + 0.5 - 1e-12);
    t = next;
  }
}

TEST_CASE("linear momentum") {
  CHECK(linear_momentum_coefficient(1.0) == 0.0);
  CHECK(linear_momentum_coefficient(100.0) == Approx(9.0 / 11.0));

  SUBCASE("c = 1 reduces to constant-step descent") {
    ProblemInstance instance;
    instance.tasks.push_back({Matrix::Identity(3, 3), Vector::Random(3), 0});
    instance.prior = PriorMatrix::empty(3);
    instance.params = {0.1, 0, 0};
    SolverConfig c = config_for(Algorithm::LinearMomentum, 1e-12);
    const SolverResult lm = solve(instance, c);
    c.algorithm = Algorithm::GdConstant;
    const SolverResult gd = solve(instance, c);
    CHECK(lm.objective_trace[1] == gd.objective_trace[1]);
    CHECK((lm.final_P - gd.final_P).norm() <= 1e-12);
  }
  SUBCASE("underdetermined tasks have no strong convexity") {
    std::mt19937_64 rng(9);
    const ProblemInstance instance = oracle::random_instance(rng, 10, 2, 4, {1, 0, 0}, 0);
    try {
      solve(instance, config_for(Algorithm::LinearMomentum));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::StrongConvexityUnavailable);
    }
  }
  SUBCASE("needs several quiet iterations to stop") {
    std::mt19937_64 rng(10);
    const ProblemInstance instance = oracle::random_instance(rng, 4, 3, 12, {1, 1, 1});
    const SolverResult r = solve(instance, config_for(Algorithm::LinearMomentum, 1e-6));
    REQUIRE(r.termination == Termination::Tolerance);
    REQUIRE(r.iterations >= 3);
  }
}

TEST_CASE("solvers agree on the optimum") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const ProblemInstance instance = oracle::random_instance(rng, 6, 3, 14, {1, 1, 1});
    std::vector<double> finals;
    for (Algorithm a : kAllAlgorithms) finals.push_back(solve(instance, config_for(a, 1e-13, 100000)).objective_trace.back());
    for (double F : finals) CHECK(F == Approx(finals[3]).epsilon(1e-8));
  }
}

TEST_CASE("target objective stops early") {
  std::mt19937_64 rng(12);
  const ProblemInstance instance = oracle::random_instance(rng, 6, 3, 14, {1, 1, 1});
  SolverConfig c = config_for(Algorithm::GdConstant, 1e-14);
  const SolverResult full = solve(instance, c);
  c.target_objective = full.objective_trace[5];
  const SolverResult r = solve(instance, c);
  CHECK(r.termination == Termination::TargetReached);
  CHECK(r.iterations == 5);
}

TEST_CASE("max iterations") {
  std::mt19937_64 rng(13);
  const ProblemInstance instance = oracle::random_instance(rng, 6, 3, 14, {1, 1, 1});
  const SolverResult r = solve(instance, config_for(Algorithm::FistaBacktracking, 1e-14, 4));
  CHECK(r.iterations == 4);
  CHECK(r.termination == Termination::MaxIterations);
}

TEST_CASE("stationary point is reported") {
  // Large lambda: the zero matrix is optimal and prox maps it to itself.
  std::mt19937_64 rng(14);
  const ProblemInstance instance = oracle::random_instance(rng, 5, 2, 6, {1e6, 1, 1});
  const SolverResult r = solve(instance, config_for(Algorithm::GdConstant));
  CHECK(r.iterations == 1);
  CHECK(r.termination == Termination::Stationary);
  CHECK(r.final_P.isZero(0.0));
}

TEST_CASE("comparison runs share the start and survive failures") {
  std::mt19937_64 rng(15);
  const ProblemInstance instance = oracle::random_instance(rng, 10, 2, 4, {1, 1, 1});
  SolverConfig base;
  base.initial_P = oracle::gaussian(rng, 10, 2);
  const auto entries = run_comparison(instance, comparison_configs(base));
  REQUIRE(entries.size() == 5);
  for (const auto& e : entries) {
    if (e.algorithm == Algorithm::LinearMomentum) {
      CHECK_FALSE(e.result);
      CHECK(e.error.find("strong-convexity") != std::string::npos);
    } else {
      REQUIRE(e.result);
      CHECK(e.result->objective_trace.front() == entries.front().result->objective_trace.front());
      CHECK(e.result->initial_P == *base.initial_P);
    }
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(16);
  const ProblemInstance instance = oracle::random_instance(rng, 6, 3, 14, {1, 1, 1});
  for (Algorithm a : kAllAlgorithms) {
    const SolverResult r1 = solve(instance, config_for(a, 1e-8));
    const SolverResult r2 = solve(instance, config_for(a, 1e-8));
    CHECK(r1.objective_trace == r2.objective_trace);
    CHECK(r1.stepsize_trace == r2.stepsize_trace);
    CHECK(r1.final_P == r2.final_P);
  }
}
