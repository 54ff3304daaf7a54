#include "gapsoup/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gapsoup {

namespace {

Matrix centered(const Matrix& features) {
    const std::vector<double> mu = column_means(features);
    Matrix c(features.rows, features.cols);
    for (std::size_t i = 0; i < features.rows; ++i)
        for (std::size_t j = 0; j < features.cols; ++j)
            c(i, j) = features(i, j) - mu[j];
    return c;
}

Matrix scatter_from_centered(const Matrix& c, std::size_t n, ScatterNorm normalization,
                             bool use_omp) {
    const std::size_t d = c.cols;
    Matrix s(d, d);
    const long long dll = static_cast<long long>(d);
#pragma omp parallel for schedule(dynamic) if (use_omp)
    for (long long ii = 0; ii < dll; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t j = i; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) acc += c(r, i) * c(r, j);
            s(i, j) = acc;
            s(j, i) = acc;
        }
    }
    if (normalization == ScatterNorm::Sample) {
        const double denom = static_cast<double>(n - 1);
        for (double& v : s.data) v /= denom;
    }
    return s;
}

void check_scatter_pre(const Matrix& features, ScatterNorm normalization) {
    if (features.rows == 0 || features.cols == 0) {
        throw std::invalid_argument("scatter_matrix: empty input");
    }
    if (normalization == ScatterNorm::Sample && features.rows < 2) {
        throw std::invalid_argument("scatter_matrix: sample normalization needs N >= 2");
    }
}

void check_symmetric(const Matrix& a) {
    if (a.rows != a.cols) {
        throw std::invalid_argument("symmetric_eigen: matrix not square");
    }
    const double scale = std::max(a.frobenius_norm(), 1e-300);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = i + 1; j < a.cols; ++j)
            if (std::fabs(a(i, j) - a(j, i)) > 1e-9 * scale) {
                throw std::invalid_argument("symmetric_eigen: input not symmetric");
            }
}

double offdiag_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace

Matrix scatter_matrix(const Matrix& features, ScatterNorm normalization) {
    check_scatter_pre(features, normalization);
    return scatter_from_centered(centered(features), features.rows, normalization, true);
}

EigenDecomposition symmetric_eigen(const Matrix& a, double tol, std::size_t max_sweeps) {
    check_symmetric(a);
    const std::size_t n = a.rows;
    if (tol <= 0.0) tol = 1e-12 * a.frobenius_norm();

    Matrix m = a;           // rotated copy, converges to diagonal
    Matrix v(n, n);         // accumulated rotations
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    bool converged = n < 2 || offdiag_norm(m) <= tol;
    for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                // Classic Jacobi rotation annihilating m(p,q).
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        converged = offdiag_norm(m) <= tol;
    }
    if (!converged) {
        throw std::runtime_error("symmetric_eigen: no convergence within " +
                                 std::to_string(max_sweeps) + " sweeps");
    }

    // Stable descending sort; ties keep the Jacobi output order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = m(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

Matrix psd_sqrt(const Matrix& a) {
    const EigenDecomposition eig = symmetric_eigen(a);
    const double neg_tol = 1e-9 * a.frobenius_norm();
    const std::size_t n = a.rows;

    std::vector<double> sqrt_l(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double l = eig.eigenvalues[k];
        if (l < -neg_tol) {
            throw std::invalid_argument("psd_sqrt: eigenvalue " + std::to_string(l) +
                                        " below the PSD tolerance");
        }
        sqrt_l[k] = std::sqrt(std::max(l, 0.0));
    }

    // V * diag(sqrt_l) * V^T
    Matrix scaled = eig.eigenvectors;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) scaled(i, k) *= sqrt_l[k];
    return matmul(scaled, eig.eigenvectors.transposed());
}

namespace serial {

Matrix scatter_matrix(const Matrix& features, ScatterNorm normalization) {
    check_scatter_pre(features, normalization);
    return scatter_from_centered(centered(features), features.rows, normalization, false);
}

}  // namespace serial
}  // namespace gapsoup
