#pragma once

#include "mtlprior/model.hpp"

namespace mtlprior {

/// Row-wise group soft-thresholding: p^j = max(0, 1 - lambda / (eta |u^j|)) u^j.
/// Rows with |u^j| = 0 map to zero rows. This is the unique minimizer of
/// eta/2 |P - U|_F^2 + lambda |P|_{2,1}.
CoefficientMatrix prox_of_point(const RegularizationParams& params, const CoefficientMatrix& U,
                                double eta);

/// Proximal-gradient step at A with curvature eta: the minimizer of M_{A,eta}.
CoefficientMatrix prox_step(const ProblemInstance& instance, const CoefficientMatrix& A,
                            double eta);

/// Same step when grad f(A) has already been evaluated.
CoefficientMatrix prox_step_from_gradient(const RegularizationParams& params,
                                          const CoefficientMatrix& A,
                                          const CoefficientMatrix& gradient, double eta);

}  // namespace mtlprior
