#pragma once

#include <cstddef>
#include <vector>

#include "gapsoup/matrix.hpp"

namespace gapsoup {

enum class ScatterNorm {
    None,    // (F - mu)^T (F - mu), unnormalized
    Sample,  // divided by N - 1
};

// Scatter / covariance matrix of the rows of `features`. Symmetric by
// construction (the upper triangle is computed once and mirrored).
Matrix scatter_matrix(const Matrix& features, ScatterNorm normalization);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // sorted descending
    Matrix eigenvectors;              // columns are unit eigenvectors, same order
};

// Cyclic-Jacobi eigendecomposition of a symmetric matrix. Deterministic:
// identical input bits give identical output bits. tol <= 0 selects the
// default 1e-12 * ||a||_F.
EigenDecomposition symmetric_eigen(const Matrix& a, double tol = 0.0,
                                   std::size_t max_sweeps = 100);

// Symmetric PSD square root via the eigendecomposition. Eigenvalues in
// [-1e-9 * ||a||_F, 0) are clamped to zero; anything more negative is an
// error.
Matrix psd_sqrt(const Matrix& a);

namespace serial {
Matrix scatter_matrix(const Matrix& features, ScatterNorm normalization);
}

}  // namespace gapsoup
