#include "gapsoup/vcr.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gapsoup/linalg.hpp"

namespace gapsoup {

LossValueAndGrad vcr_loss(const Matrix& batch, const VcrParams& p) {
    const std::size_t n = batch.rows, d = batch.cols;
    if (n < 2) throw std::invalid_argument("vcr_loss: batch needs N >= 2");
    if (d < 2) throw std::invalid_argument("vcr_loss: batch needs D >= 2");
    if (p.epsilon <= 0.0) throw std::invalid_argument("vcr_loss: epsilon must be positive");
    if (p.lambda_var < 0.0 || p.lambda_cov < 0.0) {
        throw std::invalid_argument("vcr_loss: negative lambda");
    }

    const std::vector<double> mu = column_means(batch);
    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) centered(i, j) = batch(i, j) - mu[j];

    const Matrix cov = scatter_matrix(batch, ScatterNorm::Sample);

    const double dd = static_cast<double>(d);
    double var_term = 0.0;
    double cov_term = 0.0;
    // dL/dC, symmetric; the chain rule below only needs this and the
    // centered batch: dL/dX = 2/(N-1) * centered * (dL/dC).
    Matrix dldc(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        const double sd = std::sqrt(cov(i, i) + p.epsilon);
        const double hinge = 1.0 - sd;
        if (hinge > 0.0) {
            var_term += hinge;
            dldc(i, i) = -p.lambda_var / (dd * 2.0 * sd);
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            cov_term += cov(i, j) * cov(i, j);
            dldc(i, j) = p.lambda_cov * 2.0 * cov(i, j) / (dd * (dd - 1.0));
        }
    }

    LossValueAndGrad out;
    out.value = p.lambda_var * var_term / dd +
                p.lambda_cov * cov_term / (dd * (dd - 1.0));
    Matrix grad = matmul(centered, dldc);
    const double scale = 2.0 / static_cast<double>(n - 1);
    for (double& v : grad.data) v *= scale;
    out.grad = std::move(grad);
    return out;
}

}  // namespace gapsoup
