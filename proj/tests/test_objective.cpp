#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "mtlprior/objective.hpp"
#include "support/oracles.hpp"

using namespace mtlprior;
using doctest::Approx;

namespace {

TaskData task(Matrix X, Vector y, int id = 0) { return {std::move(X), std::move(y), id}; }

ProblemInstance single(Matrix X, Vector y, RegularizationParams params) {
  ProblemInstance instance;
  const Eigen::Index d = X.cols();
  instance.tasks.push_back(task(std::move(X), std::move(y)));
  instance.prior = PriorMatrix::empty(d);
  instance.params = params;
  return instance;
}

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }
Vector v1(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("eval_smooth hand examples") {
  CHECK(eval_smooth(single(m1(1), v1(2), {1, 0, 0}), m1(0)) == 2.0);

  const Vector p = Vector::Random(2);
  CHECK(eval_smooth(single(Matrix::Identity(2, 2), p, {1, 0, 0}), p) == 0.0);

  ProblemInstance two;
  two.tasks = {task(Matrix::Identity(2, 2), Vector::Unit(2, 0), 0),
               task(Matrix::Identity(2, 2), Vector::Unit(2, 1), 1)};
  two.prior = PriorMatrix::empty(2);
  two.params = {1, 0, 1};
  CHECK(eval_smooth(two, Matrix::Identity(2, 2)) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("eval_nonsmooth hand examples") {
  CHECK(eval_nonsmooth({1, 1, 1}, Matrix::Zero(3, 2)) == 0.0);
  CHECK(eval_nonsmooth({1, 1, 1}, Matrix::Identity(2, 2)) == 2.0);
  Matrix P(3, 2);
  P << 3, 4, 0, 0, 1, 0;
  CHECK(eval_nonsmooth({2, 1, 1}, P) == 12.0);
}

TEST_CASE("eval_full recomposes") {
  std::mt19937_64 rng(11);
  ProblemInstance instance = oracle::random_instance(rng, 6, 3, 8, {0.7, 1.3, 0.4});
  const Matrix P = oracle::gaussian(rng, 6, 3);
  const double F = eval_full(instance, P);
  CHECK(F == Approx(eval_smooth(instance, P) + eval_nonsmooth(instance.params, P)).epsilon(1e-15));
  CHECK(F == Approx(oracle::full_value(instance, P)).epsilon(1e-12));

  double half_y = 0;
  for (const auto& t : instance.tasks) half_y += 0.5 * t.responses.squaredNorm();
  CHECK(eval_full(instance, Matrix::Zero(6, 3)) == Approx(half_y).epsilon(1e-15));

  instance.params.lambda = 0;
  CHECK(eval_full(instance, P) == eval_smooth(instance, P));
}

TEST_CASE("eval rejects mismatched coefficients") {
  std::mt19937_64 rng(1);
  const ProblemInstance instance = oracle::random_instance(rng, 4, 2, 5, {});
  CHECK_THROWS_AS(eval_smooth(instance, Matrix::Zero(4, 3)), Error);
  CHECK_THROWS_AS(grad_smooth(instance, Matrix::Zero(3, 2)), Error);
}

TEST_CASE("gradient examples") {
  const Vector p = Vector::Random(3);
  CHECK(grad_smooth(single(Matrix::Identity(3, 3), p, {1, 0, 0}), p).isZero(0.0));

  std::mt19937_64 rng(5);
  ProblemInstance a = oracle::random_instance(rng, 4, 1, 6, {1, 1, 0});
  ProblemInstance b = a;
  b.params.epsilon = 25.0;
  const Matrix P = oracle::gaussian(rng, 4, 1);
  CHECK(grad_smooth(a, P) == grad_smooth(b, P));
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const double choices[] = {0.0, 1.0, 10.0};
    const ProblemInstance instance = oracle::random_instance(
        rng, 5, 3, 7, {1.0, choices[trial % 3], choices[(trial / 3) % 3]});
    const Matrix P = oracle::gaussian(rng, 5, 3);
    CHECK(oracle::relative_error(grad_smooth(instance, P),
                                 oracle::finite_difference_gradient(instance, P)) <= 1e-6);
  }
}

TEST_CASE("smooth_curvature and objective_difference") {
  std::mt19937_64 rng(8);
  const ProblemInstance instance = oracle::random_instance(rng, 5, 4, 6, {0.5, 2.0, 3.0});
  const Matrix H = oracle::dense_hessian(instance);
  const Matrix A = oracle::gaussian(rng, 5, 4);
  const Matrix B = oracle::gaussian(rng, 5, 4);
  const Matrix delta = B - A;
  const Eigen::Map<const Vector> v(delta.data(), delta.size());
  CHECK(smooth_curvature(instance, delta) == Approx(0.5 * v.dot(H * v)).epsilon(1e-12));
  const double exact = oracle::full_value(instance, B) - oracle::full_value(instance, A);
  CHECK(objective_difference(instance, A, B, grad_smooth(instance, A)) ==
        Approx(exact).epsilon(1e-10));
  CHECK(objective_difference(instance, A, A, grad_smooth(instance, A)) == 0.0);
}

TEST_CASE("majorization_value") {
  std::mt19937_64 rng(3);
  const ProblemInstance instance = oracle::random_instance(rng, 4, 3, 5, {});
  const Matrix A = oracle::gaussian(rng, 4, 3);
  CHECK(majorization_value(instance, A, A, 2.0) == Approx(eval_full(instance, A)).epsilon(1e-14));

  const ProblemInstance quad = single(m1(1), v1(0), {0, 0, 0});
  CHECK(majorization_value(quad, m1(1), m1(0), 1.0) == Approx(0.0));

  CHECK_THROWS_AS(majorization_value(instance, A, A, 0.0), Error);
  try {
    majorization_value(instance, A, A, -1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveEta);
  }
}

TEST_CASE("majorization with L_safe dominates F") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const ProblemInstance instance = oracle::random_instance(rng, 6, 4, 5, {1.0, 1.0, 2.0});
    const double L = compute_constants(instance).L_safe;
    for (int k = 0; k < 100; ++k) {
      const Matrix A = oracle::gaussian(rng, 6, 4);
      const Matrix P = A + 0.1 * (k % 10 + 1) * oracle::gaussian(rng, 6, 4);
      const double F = eval_full(instance, P);
      CHECK(majorization_value(instance, A, P, L) >= F - 1e-9 * (1 + std::abs(F)));
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("convexity witnesses") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    const ProblemInstance instance = oracle::random_instance(rng, 5, 3, 12, {1.0, 1.0, 1.0});
    const SmoothnessConstants c = compute_constants(instance);
    const Matrix P = oracle::gaussian(rng, 5, 3);
    const Matrix Q = oracle::gaussian(rng, 5, 3);
    const double t = unit(rng);
    const double fP = eval_smooth(instance, P);
    const double fQ = eval_smooth(instance, Q);
    const double mix = eval_smooth(instance, t * P + (1 - t) * Q);
    const double scale = 1e-9 * (1 + std::max(std::abs(fP), std::abs(fQ)));
    CHECK(mix <= t * fP + (1 - t) * fQ + scale);
    CHECK(mix <= t * fP + (1 - t) * fQ - 0.5 * c.sigma_safe * t * (1 - t) * (P - Q).squaredNorm() +
                     scale);
    const double descent = fP + (grad_smooth(instance, P).array() * (Q - P).array()).sum() +
                           0.5 * c.L_safe * (Q - P).squaredNorm();
    CHECK(fQ <= descent + scale);
  }
}

TEST_CASE("power iteration") {
  Matrix A = Matrix::Zero(3, 3);
  A.diagonal() << 5, 2, 1;
  const EigenEstimate top = power_largest(A);
  CHECK(top.converged);
  CHECK(top.value == Approx(5.0).epsilon(1e-9));
  const SpectrumBounds b = extremal_eigenvalues(A);
  CHECK(b.smallest.value == Approx(1.0).epsilon(1e-8));
  CHECK(b.upper >= 5.0);
  CHECK(b.lower <= 1.0);
  CHECK(power_largest(A).value == top.value);

  const SpectrumBounds zero = extremal_eigenvalues(Matrix::Zero(4, 4));
  CHECK(zero.upper == 0.0);
  CHECK(zero.lower == 0.0);
}

TEST_CASE("path Laplacian top eigenvalue") {
  CHECK(path_laplacian_top(1) == 0.0);
  CHECK(path_laplacian_top(2) == Approx(2.0).epsilon(1e-15));
  for (Eigen::Index m = 2; m <= 8; ++m) {
    Matrix Lap = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      Lap(i, i) += 1; Lap(i + 1, i + 1) += 1; Lap(i, i + 1) -= 1; Lap(i + 1, i) -= 1;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(Lap);
    CHECK(path_laplacian_top(m) == Approx(es.eigenvalues().maxCoeff()).epsilon(1e-12));
  }
}

TEST_CASE("constants: identity spectrum") {
  const ProblemInstance instance = single(Matrix::Identity(3, 3), Vector::Ones(3), {1, 0, 0});
  const SmoothnessConstants c = compute_constants(instance);
  CHECK(c.L_paper == Approx(1.0).epsilon(1e-9));
  CHECK(c.L_safe == Approx(1.0).epsilon(1e-9));
  CHECK(c.sigma_paper == Approx(1.0).epsilon(1e-9));
  CHECK(c.sigma_safe == Approx(1.0).epsilon(1e-9));
  REQUIRE(c.condition_c);
  CHECK(*c.condition_c == Approx(1.0).epsilon(1e-8));
  CHECK(c.eigen_converged);
}

TEST_CASE("constants: closed-form arithmetic") {
  // X^T X = diag(3, 1), D^T D has top eigenvalue 1, theta = 2, epsilon = 0.5, m = 2.
  ProblemInstance instance;
  Matrix X = Matrix::Zero(2, 2);
  X(0, 0) = std::sqrt(3.0);
  X(1, 1) = 1.0;
  instance.tasks = {task(X, Vector::Zero(2), 0), task(X, Vector::Zero(2), 1)};
  instance.prior.rows = Matrix::Zero(1, 2);
  instance.prior.rows(0, 0) = 1.0;
  instance.params = {1.0, 2.0, 0.5};
  const SmoothnessConstants c = compute_constants(instance);
  // max smax + theta d_max + 2 eps = 3 + 2 + 1.
  CHECK(c.L_paper == Approx(6.0).epsilon(1e-9));
  CHECK(c.chain_max == Approx(2.0).epsilon(1e-12));
  CHECK(c.L_safe >= 3 + 2 + 0.5 * 2.0 - 1e-9);
  CHECK(c.L_safe == Approx(6.0).epsilon(1e-8));
}

TEST_CASE("constants bracket the dense Hessian spectrum") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = trial % 2 == 0 ? 12 : 3;  // odd trials are underdetermined
    const ProblemInstance instance = oracle::random_instance(rng, 4, 3, n, {1.0, 1.5, 0.7});
    const SmoothnessConstants c = compute_constants(instance);
    Eigen::SelfAdjointEigenSolver<Matrix> es(oracle::dense_hessian(instance));
    CHECK(c.L_safe >= es.eigenvalues().maxCoeff() * (1 - 1e-12));
    CHECK(c.sigma_safe <= es.eigenvalues().minCoeff() + 1e-9);
    CHECK(c.sigma_safe >= 0.0);
    if (c.condition_c) CHECK(*c.condition_c >= 1.0);
  }
}

TEST_CASE("constants source names") {
  CHECK(parse_constants_source("safe") == ConstantsSource::Safe);
  CHECK(parse_constants_source("paper") == ConstantsSource::Paper);
  CHECK(to_string(ConstantsSource::Paper) == "paper");
  CHECK_THROWS_AS(parse_constants_source("exact"), Error);
}
