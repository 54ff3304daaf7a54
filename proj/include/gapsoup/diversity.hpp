#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "gapsoup/matrix.hpp"

namespace gapsoup {

// N x D matrix of encoded features plus provenance.
struct FeatureSet {
    Matrix features;
    std::string label;  // e.g. "real", "generated"
    std::optional<std::string> source_run;
};

struct DiversityReport {
    double d_mag = 0.0;  // largest eigenvalue of the unnormalized scatter
    double d_dir = 0.0;  // inverse RMS of off-diagonal scatter entries; may be +inf
    std::size_t n = 0;
    std::size_t d = 0;
};

// Thrown when all features are identical and the direction metric is undefined.
struct DegenerateFeatures : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Largest eigenvalue of the unnormalized scatter of fs.features.
double magnitude_diversity(const FeatureSet& fs);

// Inverse RMS of the off-diagonal scatter entries after scaling the features
// by 1/sqrt(magnitude_diversity). +inf when every off-diagonal is exactly 0.
double direction_diversity(const FeatureSet& fs);

DiversityReport diversity_report(const FeatureSet& fs);

// Gaussian Frechet distance between the sample moments of two feature sets.
// Clamped to 0 against small numerical undershoot. Warns on stderr when
// either N < D + 1.
double frechet_distance(const FeatureSet& a, const FeatureSet& b);

// Text format: header line "N D label", then N rows of D decimal reals.
FeatureSet load_feature_set(const std::string& path);
void save_feature_set(const FeatureSet& fs, const std::string& path);

}  // namespace gapsoup
