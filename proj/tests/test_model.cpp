#include <doctest.h>

#include <limits>

#include "mtlprior/model.hpp"

using namespace mtlprior;

namespace {

ProblemInstance two_tasks() {
  ProblemInstance instance;
  for (int i = 0; i < 2; ++i) {
    TaskData t;
    t.features = Matrix::Random(4, 3);
    t.responses = Vector::Random(4);
    t.task_id = i;
    instance.tasks.push_back(t);
  }
  instance.prior.rows = Matrix::Zero(3, 3);
  for (int r = 0; r < 3; ++r) {
    instance.prior.rows(r, r) = 1;
    instance.prior.rows(r, (r + 1) % 3) = -1;
  }
  return instance;
}

ErrorKind kind_of(const ProblemInstance& instance) {
  try {
    validate_instance(instance);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("instance was accepted");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("well-formed instance is accepted") {
  const ProblemInstance instance = two_tasks();
  const ProblemInstance checked = validate_instance(instance);
  CHECK(checked.dim() == 3);
  CHECK(checked.num_tasks() == 2);
  CHECK(zero_coefficients(checked).isZero());
}

TEST_CASE("task feature count mismatch is rejected") {
  ProblemInstance instance = two_tasks();
  instance.tasks[1].features = Matrix::Random(4, 4);
  CHECK(kind_of(instance) == ErrorKind::DimensionMismatch);
  try {
    validate_instance(instance);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("task 1") != std::string::npos);
  }
}

TEST_CASE("negative regularization weight is rejected") {
  ProblemInstance instance = two_tasks();
  instance.params.lambda = -0.1;
  CHECK(kind_of(instance) == ErrorKind::NegativeParameter);
  instance.params = {1, -1, 1};
  CHECK(kind_of(instance) == ErrorKind::NegativeParameter);
  instance.params = {1, 1, -1e-12};
  CHECK(kind_of(instance) == ErrorKind::NegativeParameter);
}

TEST_CASE("other structural violations") {
  ProblemInstance instance = two_tasks();
  SUBCASE("response length") {
    instance.tasks[0].responses = Vector::Zero(3);
    CHECK(kind_of(instance) == ErrorKind::DimensionMismatch);
  }
  SUBCASE("prior width") {
    instance.prior.rows = Matrix::Zero(1, 2);
    CHECK(kind_of(instance) == ErrorKind::DimensionMismatch);
  }
  SUBCASE("non-finite feature") {
    instance.tasks[1].features(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK(kind_of(instance) == ErrorKind::NonFiniteEntry);
  }
  SUBCASE("non-finite response") {
    instance.tasks[0].responses(0) = std::numeric_limits<double>::infinity();
    CHECK(kind_of(instance) == ErrorKind::NonFiniteEntry);
  }
  SUBCASE("no tasks") {
    instance.tasks.clear();
    CHECK_THROWS_AS(validate_instance(instance), Error);
  }
}

TEST_CASE("empty prior is allowed") {
  ProblemInstance instance = two_tasks();
  instance.prior = PriorMatrix::empty(3);
  CHECK_NOTHROW(validate_instance(instance));
}

TEST_CASE("coefficient shape check") {
  const ProblemInstance instance = two_tasks();
  CHECK_NOTHROW(check_coefficients(instance, Matrix::Zero(3, 2)));
  CHECK_THROWS_AS(check_coefficients(instance, Matrix::Zero(2, 3)), Error);
}

TEST_CASE("prior kind names round-trip") {
  for (PriorKind k : {PriorKind::Natural, PriorKind::Artificial, PriorKind::User}) {
    CHECK(parse_prior_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_prior_kind("expert"), Error);
}
