#include "gapsoup/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace gapsoup {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
        throw std::invalid_argument("Matrix: data length does not match rows*cols");
    }
    if (!all_finite()) {
        throw std::invalid_argument("Matrix: non-finite entry");
    }
}

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
}

Matrix Matrix::transposed() const {
    Matrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: inner dimensions disagree");
    }
    Matrix c(a.rows, b.cols);
    const std::size_t n = a.rows, k = a.cols, m = b.cols;
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) {
                c(i, j) += aip * b(p, j);
            }
        }
    }
    return c;
}

std::vector<double> column_means(const Matrix& a) {
    if (a.rows == 0) {
        throw std::invalid_argument("column_means: empty matrix");
    }
    std::vector<double> mu(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            mu[j] += a(i, j);
    for (double& v : mu) v /= static_cast<double>(a.rows);
    return mu;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: inner dimensions disagree");
    }
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t p = 0; p < a.cols; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j)
                c(i, j) += aip * b(p, j);
        }
    return c;
}

}  // namespace serial
}  // namespace gapsoup
