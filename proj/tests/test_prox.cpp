#include <doctest.h>

#include <random>

#include "mtlprior/objective.hpp"
#include "mtlprior/prox.hpp"
#include "support/oracles.hpp"

using namespace mtlprior;
using doctest::Approx;

TEST_CASE("prox_of_point examples") {
  const RegularizationParams params{1, 1, 1};
  CHECK(prox_of_point(params, Matrix::Zero(3, 2), 1.0).isZero(0.0));

  Matrix U(2, 2);
  U << 3, 4, 0.1, 0;
  const Matrix P = prox_of_point(params, U, 1.0);
  CHECK(P(0, 0) == Approx(2.4).epsilon(1e-15));
  CHECK(P(0, 1) == Approx(3.2).epsilon(1e-15));
  CHECK(P.row(1).isZero(0.0));

  Matrix small(1, 2);
  small << 0.1, 0.0;
  CHECK(prox_of_point({0.5, 1, 1}, small, 1.0).isZero(0.0));

  CHECK(prox_of_point({100, 1, 1}, Matrix::Random(4, 3), 1.0).isZero(0.0));
  CHECK(prox_of_point({0, 1, 1}, U, 3.0) == U);

  CHECK_THROWS_AS(prox_of_point(params, U, 0.0), Error);
}

TEST_CASE("prox_step with lambda = 0 is a gradient step") {
  std::mt19937_64 rng(12);
  const ProblemInstance instance = oracle::random_instance(rng, 5, 3, 6, {0.0, 1.0, 1.0});
  const Matrix A = oracle::gaussian(rng, 5, 3);
  const double eta = 7.5;
  const Matrix expected = A - grad_smooth(instance, A) / eta;
  CHECK((prox_step(instance, A, eta) - expected).norm() <= 1e-14 * expected.norm());
  CHECK_THROWS_AS(prox_step(instance, A, -1.0), Error);
  CHECK_THROWS_AS(prox_step(instance, Matrix::Zero(4, 3), 1.0), Error);
}

TEST_CASE("prox_of_point matches a brute-force subproblem search") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix U = oracle::gaussian(rng, 3, 2);
    const double lambda = 0.2 + 0.1 * trial;
    const double eta = 1.5;
    const Matrix P = prox_of_point({lambda, 0, 0}, U, eta);
    for (Eigen::Index r = 0; r < 3; ++r) {
      const Eigen::RowVectorXd expected = oracle::row_prox_search(U.row(r), lambda, eta);
      CHECK((P.row(r) - expected).norm() <= 1e-4);
    }
  }
}

TEST_CASE("prox optimality conditions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix U = oracle::gaussian(rng, 6, 3);
    const double lambda = weight(rng);
    const double eta = weight(rng);
    const Matrix P = prox_of_point({lambda, 0, 0}, U, eta);
    for (Eigen::Index r = 0; r < U.rows(); ++r) {
      const double norm = P.row(r).norm();
      if (norm > 0) {
        CHECK((eta * (P.row(r) - U.row(r)) + lambda * P.row(r) / norm).norm() <= 1e-10);
      } else {
        CHECK(eta * U.row(r).norm() <= lambda + 1e-10);
      }
    }
  }
}

TEST_CASE("prox is non-expansive") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix U1 = oracle::gaussian(rng, 5, 4);
    const Matrix U2 = U1 + 0.3 * oracle::gaussian(rng, 5, 4);
    const RegularizationParams params{1.0, 0, 0};
    CHECK((prox_of_point(params, U1, 1.2) - prox_of_point(params, U2, 1.2)).norm() <=
          (U1 - U2).norm() * (1 + 1e-15));
  }
}

TEST_CASE("prox_step minimizes the majorizer") {
  std::mt19937_64 rng(55);
  const ProblemInstance instance = oracle::random_instance(rng, 4, 3, 6, {1.5, 1.0, 1.0});
  const Matrix A = oracle::gaussian(rng, 4, 3);
  const double eta = compute_constants(instance).L_safe;
  const Matrix P = prox_step(instance, A, eta);
  const double best = majorization_value(instance, A, P, eta);
  for (int k = 0; k < 200; ++k) {
    const Matrix Q = P + 0.05 * oracle::gaussian(rng, 4, 3);
    CHECK(majorization_value(instance, A, Q, eta) >= best - 1e-12 * (1 + std::abs(best)));
  }
}

TEST_CASE("prox_step decreases F when eta >= L_safe") {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 30; ++trial) {
    const ProblemInstance instance = oracle::random_instance(rng, 6, 3, 8, {1.0, 1.0, 1.0});
    const double L = compute_constants(instance).L_safe;
    const Matrix A = oracle::gaussian(rng, 6, 3);
    const double before = eval_full(instance, A);
    CHECK(eval_full(instance, prox_step(instance, A, L)) <= before + 1e-12 * (1 + before));
  }
}
