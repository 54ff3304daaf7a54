#pragma once

#include <cstddef>
#include <vector>

namespace gapsoup {

// Dense row-major matrix of doubles. The substrate for features,
// covariances, and flattened parameters.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, size rows*cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    // Validating constructor: checks size and rejects non-finite entries.
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
    double frobenius_norm() const;
    Matrix transposed() const;
};

// C = A * B. OpenMP over output rows; each output element is accumulated
// serially, so the result is bitwise independent of the thread count.
Matrix matmul(const Matrix& a, const Matrix& b);

// Column means of a (length a.cols).
std::vector<double> column_means(const Matrix& a);

namespace serial {
// Reference kernels without OpenMP, kept for tests and the kernel benchmark.
Matrix matmul(const Matrix& a, const Matrix& b);
}  // namespace serial

}  // namespace gapsoup
