// Compares the OpenMP kernels against the serial reference implementations
// and reports timings plus the max elementwise deviation (expected: 0, the
// parallel kernels accumulate each output element serially).

#include <chrono>
#include <cmath>
#include <cstdio>

#include "gapsoup/linalg.hpp"
#include "gapsoup/matrix.hpp"
#include "gapsoup/rng.hpp"

using namespace gapsoup;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.next_gaussian();
    return m;
}

template <typename F>
double time_ms(F&& fn, int reps) {
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    }
    return m;
}

}  // namespace

int main() {
    SplitMix64 rng(42);
    const int reps = 5;

    {
        const Matrix a = random_matrix(512, 512, rng);
        const Matrix b = random_matrix(512, 512, rng);
        Matrix c_omp, c_ser;
        const double t_omp = time_ms([&] { c_omp = matmul(a, b); }, reps);
        const double t_ser = time_ms([&] { c_ser = serial::matmul(a, b); }, reps);
        std::printf("matmul 512x512:   omp %8.2f ms   serial %8.2f ms   speedup %.2fx   maxdiff %g\n",
                    t_omp, t_ser, t_ser / t_omp, max_abs_diff(c_omp, c_ser));
    }
    {
        const Matrix f = random_matrix(4000, 256, rng);
        Matrix s_omp, s_ser;
        const double t_omp = time_ms([&] { s_omp = scatter_matrix(f, ScatterNorm::None); }, reps);
        const double t_ser =
            time_ms([&] { s_ser = serial::scatter_matrix(f, ScatterNorm::None); }, reps);
        std::printf("scatter 4000x256: omp %8.2f ms   serial %8.2f ms   speedup %.2fx   maxdiff %g\n",
                    t_omp, t_ser, t_ser / t_omp, max_abs_diff(s_omp, s_ser));
    }
    return 0;
}
