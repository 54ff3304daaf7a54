#include "gapsoup/diversity.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "gapsoup/io.hpp"
#include "gapsoup/linalg.hpp"

namespace gapsoup {

namespace {

void check_feature_set(const FeatureSet& fs, std::size_t min_dim) {
    if (fs.features.rows < 2) {
        throw std::invalid_argument("feature set needs N >= 2 samples");
    }
    if (fs.features.cols < min_dim) {
        throw std::invalid_argument("feature set dimension too small");
    }
}

double offdiag_rms(const Matrix& s) {
    const std::size_t d = s.rows;
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j) acc += s(i, j) * s(i, j);
    return std::sqrt(acc / static_cast<double>(d * (d - 1)));
}

double trace(const Matrix& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) t += m(i, i);
    return t;
}

}  // namespace

double magnitude_diversity(const FeatureSet& fs) {
    check_feature_set(fs, 1);
    const Matrix s = scatter_matrix(fs.features, ScatterNorm::None);
    return symmetric_eigen(s).eigenvalues.front();
}

double direction_diversity(const FeatureSet& fs) {
    check_feature_set(fs, 2);
    const double d_mag = magnitude_diversity(fs);
    if (d_mag <= 0.0) {
        throw DegenerateFeatures("direction_diversity: zero magnitude diversity");
    }
    const double inv = 1.0 / std::sqrt(d_mag);
    Matrix scaled = fs.features;
    for (double& v : scaled.data) v *= inv;
    const Matrix s = scatter_matrix(scaled, ScatterNorm::None);
    const double rms = offdiag_rms(s);
    if (rms == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / rms;
}

DiversityReport diversity_report(const FeatureSet& fs) {
    DiversityReport r;
    r.n = fs.features.rows;
    r.d = fs.features.cols;
    r.d_mag = magnitude_diversity(fs);
    r.d_dir = direction_diversity(fs);
    return r;
}

double frechet_distance(const FeatureSet& a, const FeatureSet& b) {
    check_feature_set(a, 1);
    check_feature_set(b, 1);
    if (a.features.cols != b.features.cols) {
        throw std::invalid_argument("frechet_distance: dimension mismatch");
    }
    const std::size_t d = a.features.cols;
    if (a.features.rows < d + 1 || b.features.rows < d + 1) {
        std::cerr << "warning: frechet_distance with N < D+1; covariance is rank-deficient\n";
    }

    const std::vector<double> mu_a = column_means(a.features);
    const std::vector<double> mu_b = column_means(b.features);
    const Matrix cov_a = scatter_matrix(a.features, ScatterNorm::Sample);
    const Matrix cov_b = scatter_matrix(b.features, ScatterNorm::Sample);

    double mean_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = mu_a[j] - mu_b[j];
        mean_term += diff * diff;
    }

    const Matrix root_a = psd_sqrt(cov_a);
    Matrix inner = matmul(matmul(root_a, cov_b), root_a);
    // Symmetrize away roundoff before taking the root.
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double avg = 0.5 * (inner(i, j) + inner(j, i));
            inner(i, j) = avg;
            inner(j, i) = avg;
        }
    const Matrix cross = psd_sqrt(inner);

    double value = mean_term + trace(cov_a) + trace(cov_b) - 2.0 * trace(cross);
    if (value < 0.0) {
        if (value < -1e-8) {
            throw std::runtime_error("frechet_distance: negative beyond tolerance");
        }
        value = 0.0;
    }
    return value;
}

FeatureSet load_feature_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open feature file: " + path);
    std::string header;
    if (!std::getline(in, header)) {
        throw std::runtime_error("feature file is empty: " + path);
    }
    std::istringstream hs(header);
    std::size_t n = 0, d = 0;
    std::string label;
    if (!(hs >> n >> d >> label)) {
        throw std::runtime_error("malformed feature header in " + path);
    }
    std::vector<double> values;
    values.reserve(n * d);
    double v;
    while (in >> v) values.push_back(v);
    if (values.size() != n * d) {
        throw std::runtime_error("feature file " + path + ": expected " +
                                 std::to_string(n * d) + " values, got " +
                                 std::to_string(values.size()));
    }
    FeatureSet fs;
    fs.features = Matrix(n, d, std::move(values));
    fs.label = label;
    return fs;
}

void save_feature_set(const FeatureSet& fs, const std::string& path) {
    std::string body;
    body += std::to_string(fs.features.rows) + " " + std::to_string(fs.features.cols) +
            " " + fs.label + "\n";
    char buf[64];
    for (std::size_t i = 0; i < fs.features.rows; ++i) {
        for (std::size_t j = 0; j < fs.features.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", fs.features(i, j));
            if (j) body += ' ';
            body += buf;
        }
        body += '\n';
    }
    write_file_atomic(path, body);
}

}  // namespace gapsoup
