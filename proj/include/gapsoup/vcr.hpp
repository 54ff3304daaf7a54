#pragma once

#include "gapsoup/matrix.hpp"

namespace gapsoup {

struct VcrParams {
    double lambda_var = 0.0;
    double lambda_cov = 0.0;
    double epsilon = 1e-4;  // stabilizer inside the variance-term square root
};

struct LossValueAndGrad {
    double value = 0.0;
    Matrix grad;  // d(loss)/d(features), same shape as the batch
};

// Variance-covariance regularizer over a mini-batch of embedding features:
// a hinge pushing each dimension's standard deviation toward >= 1 plus a
// penalty shrinking off-diagonal covariances. C is the sample covariance
// (1/(N-1)). Returns the value and the exact analytic gradient; the hinge
// contributes zero gradient where inactive (subgradient 0 at the kink).
LossValueAndGrad vcr_loss(const Matrix& batch, const VcrParams& p);

}  // namespace gapsoup
