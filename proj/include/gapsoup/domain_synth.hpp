#pragma once

#include <cstdint>
#include <string>

#include "gapsoup/dataset.hpp"

namespace gapsoup {

// Paired "real"/"generated" classification data with a controllable domain
// gap. Class means sit on a sphere of radius 4*noise_sigma in the signal
// dimensions and are shared by both domains; the generated domain adds a
// constant offset of magnitude `gap` plus structured, class-independent
// signal in the nuisance dimensions, and draws its signal noise tighter
// (less diverse) than the real domain.
struct DomainSpec {
    std::size_t n_classes = 4;
    std::size_t dim = 16;
    std::size_t samples_per_class = 500;  // per split
    double gap = 2.0;
    std::size_t nuisance_dims = 4;
    double noise_sigma = 0.1;
    // Relative spread of the generated domain's nuisance-signature amplitude.
    // At 0 the signature is a constant shift; above 0 each generated sample
    // scales the whole signature by 1 + nuisance_jitter * g, g ~ N(0,1), so
    // the signature becomes a coherent rank-1 variance factor.
    double nuisance_jitter = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DomainPair {
    LabeledDataset real_train, real_val, real_test;
    LabeledDataset gen_train, gen_val, gen_test;
};

DomainPair generate_pair(const DomainSpec& spec);

// Label file: one class index per line.
void save_labels(const LabeledDataset& ds, const std::string& path);
std::vector<std::size_t> load_labels(const std::string& path);

// Convenience: dataset features as a FeatureSet file plus the label file.
void save_dataset(const LabeledDataset& ds, const std::string& features_path,
                  const std::string& labels_path);
LabeledDataset load_dataset(const std::string& features_path,
                            const std::string& labels_path);

}  // namespace gapsoup
