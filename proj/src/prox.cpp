#include "mtlprior/prox.hpp"

#include <cmath>
#include <string>

#include "mtlprior/objective.hpp"

namespace mtlprior {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::NonPositiveEta, "eta = " + std::to_string(eta) + " must be > 0");
  }
}

void shrink_rows(CoefficientMatrix& U, double threshold) {
  if (threshold == 0.0) return;
  for (Eigen::Index j = 0; j < U.rows(); ++j) {
    const double norm = U.row(j).norm();
    const double factor = norm > 0.0 ? std::max(0.0, 1.0 - threshold / norm) : 0.0;
    if (factor == 0.0) {
      U.row(j).setZero();
    } else {
      U.row(j) *= factor;
    }
  }
}

}  // namespace

CoefficientMatrix prox_of_point(const RegularizationParams& params, const CoefficientMatrix& U,
                                double eta) {
  check_eta(eta);
  CoefficientMatrix out = U;
  shrink_rows(out, params.lambda / eta);
  return out;
}

CoefficientMatrix prox_step_from_gradient(const RegularizationParams& params,
                                          const CoefficientMatrix& A,
                                          const CoefficientMatrix& gradient, double eta) {
  check_eta(eta);
  if (gradient.rows() != A.rows() || gradient.cols() != A.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "gradient shape differs from A");
  }
  CoefficientMatrix out = A - gradient / eta;
  shrink_rows(out, params.lambda / eta);
  return out;
}

CoefficientMatrix prox_step(const ProblemInstance& instance, const CoefficientMatrix& A,
                            double eta) {
  check_eta(eta);
  return prox_step_from_gradient(instance.params, A, grad_smooth(instance, A), eta);
}

}  // namespace mtlprior
