#include "gapsoup/domain_synth.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "gapsoup/diversity.hpp"
#include "gapsoup/io.hpp"
#include "gapsoup/rng.hpp"

namespace gapsoup {

void DomainSpec::validate() const {
    if (n_classes < 2) throw std::invalid_argument("DomainSpec: n_classes must be >= 2");
    if (dim == 0) throw std::invalid_argument("DomainSpec: dim must be positive");
    if (nuisance_dims >= dim) {
        throw std::invalid_argument("DomainSpec: nuisance_dims must be smaller than dim");
    }
    if (samples_per_class == 0) {
        throw std::invalid_argument("DomainSpec: samples_per_class must be positive");
    }
    if (gap < 0.0) throw std::invalid_argument("DomainSpec: gap must be nonnegative");
    if (noise_sigma <= 0.0) {
        throw std::invalid_argument("DomainSpec: noise_sigma must be positive");
    }
    if (nuisance_jitter < 0.0) {
        throw std::invalid_argument("DomainSpec: nuisance_jitter must be nonnegative");
    }
}

namespace {

std::vector<double> unit_vector(SplitMix64& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& x : v) {
            x = rng.next_gaussian();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

struct DomainModel {
    std::size_t signal_dims;
    std::vector<std::vector<double>> class_means;  // signal-space means, shared
    std::vector<double> gen_offset;                // signal-space shift, norm = gap
    std::vector<double> nuisance_pattern;          // +/-1 per nuisance dim
    std::vector<std::vector<double>> real_noise_basis;  // heavy real-noise subspace
};

LabeledDataset make_split(const DomainSpec& spec, const DomainModel& model,
                          bool generated, const std::string& split,
                          std::uint64_t stream_seed) {
    SplitMix64 rng(stream_seed);
    const std::size_t n = spec.n_classes * spec.samples_per_class;
    LabeledDataset ds;
    ds.features = Matrix(n, spec.dim);
    ds.labels.resize(n);
    ds.domain = generated ? "generated" : "real";
    ds.split = split;

    // Both domains share the class clouds (isotropic noise around shared
    // means); the generated domain is shifted by a constant offset and carries
    // a crisp nuisance signature, while the real domain carries extra heavy
    // noise in its own subspace, so the real task rewards robust features
    // instead of tight boundaries.
    const double nuisance_sigma = generated ? 0.1 * spec.noise_sigma : spec.noise_sigma;
    const double heavy_sigma = 4.0 * spec.noise_sigma;

    std::vector<double> coeffs(generated ? 0 : model.real_noise_basis.size());
    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
            for (double& x : coeffs) x = heavy_sigma * rng.next_gaussian();
            for (std::size_t j = 0; j < model.signal_dims; ++j) {
                double v = model.class_means[c][j] + spec.noise_sigma * rng.next_gaussian();
                if (generated) v += model.gen_offset[j];
                for (std::size_t l = 0; l < coeffs.size(); ++l) {
                    v += coeffs[l] * model.real_noise_basis[l][j];
                }
                ds.features(row, j) = v;
            }
            double signature = spec.gap;
            if (generated && spec.nuisance_jitter > 0.0) {
                signature *= 1.0 + spec.nuisance_jitter * rng.next_gaussian();
            }
            for (std::size_t j = 0; j < spec.nuisance_dims; ++j) {
                double v = nuisance_sigma * rng.next_gaussian();
                if (generated) v += signature * model.nuisance_pattern[j];
                ds.features(row, model.signal_dims + j) = v;
            }
            ds.labels[row] = c;
        }
    }
    return ds;
}

}  // namespace

DomainPair generate_pair(const DomainSpec& spec) {
    spec.validate();
    DomainModel model;
    model.signal_dims = spec.dim - spec.nuisance_dims;

    SplitMix64 master(SplitMix64::split(spec.seed, 0));
    const double radius = 4.0 * spec.noise_sigma;
    model.class_means.reserve(spec.n_classes);
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        std::vector<double> mean = unit_vector(master, model.signal_dims);
        for (double& v : mean) v *= radius;
        model.class_means.push_back(std::move(mean));
    }
    // The offset points along the first two classes' discriminant axis, so a
    // model cannot absorb it without moving a decision boundary that matters
    // in both domains.
    model.gen_offset.assign(model.signal_dims, 0.0);
    double off_norm2 = 0.0;
    for (std::size_t j = 0; j < model.signal_dims; ++j) {
        model.gen_offset[j] = model.class_means[1][j] - model.class_means[0][j];
        off_norm2 += model.gen_offset[j] * model.gen_offset[j];
    }
    if (off_norm2 < 1e-24) model.gen_offset = unit_vector(master, model.signal_dims);
    else {
        const double inv = 1.0 / std::sqrt(off_norm2);
        for (double& v : model.gen_offset) v *= inv;
    }
    for (double& v : model.gen_offset) v *= spec.gap;
    model.nuisance_pattern.resize(spec.nuisance_dims);
    for (double& v : model.nuisance_pattern) {
        v = (master.next_u64() & 1ULL) ? 1.0 : -1.0;
    }

    // Orthonormal basis spanning roughly a quarter of the signal space.
    {
        std::vector<std::vector<double>>& basis = model.real_noise_basis;
        const std::size_t rank = std::max<std::size_t>(1, model.signal_dims / 4);
        while (basis.size() < rank) {
            std::vector<double> v = unit_vector(master, model.signal_dims);
            for (const std::vector<double>& b : basis) {
                double dot = 0.0;
                for (std::size_t j = 0; j < v.size(); ++j) dot += v[j] * b[j];
                for (std::size_t j = 0; j < v.size(); ++j) v[j] -= dot * b[j];
            }
            double norm2 = 0.0;
            for (double x : v) norm2 += x * x;
            if (norm2 < 1e-12) continue;
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& x : v) x *= inv;
            basis.push_back(std::move(v));
        }
    }

    // Independent streams per (domain, split) keep the splits disjoint.
    DomainPair pair;
    pair.real_train = make_split(spec, model, false, "train", SplitMix64::split(spec.seed, 1));
    pair.real_val = make_split(spec, model, false, "val", SplitMix64::split(spec.seed, 2));
    pair.real_test = make_split(spec, model, false, "test", SplitMix64::split(spec.seed, 3));
    pair.gen_train = make_split(spec, model, true, "train", SplitMix64::split(spec.seed, 4));
    pair.gen_val = make_split(spec, model, true, "val", SplitMix64::split(spec.seed, 5));
    pair.gen_test = make_split(spec, model, true, "test", SplitMix64::split(spec.seed, 6));
    return pair;
}

void save_labels(const LabeledDataset& ds, const std::string& path) {
    std::string body;
    for (std::size_t v : ds.labels) body += std::to_string(v) + "\n";
    write_file_atomic(path, body);
}

std::vector<std::size_t> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label file: " + path);
    std::vector<std::size_t> labels;
    long long v;
    while (in >> v) {
        if (v < 0) throw std::runtime_error("label file " + path + ": negative label");
        labels.push_back(static_cast<std::size_t>(v));
    }
    return labels;
}

void save_dataset(const LabeledDataset& ds, const std::string& features_path,
                  const std::string& labels_path) {
    FeatureSet fs;
    fs.features = ds.features;
    fs.label = ds.domain;
    save_feature_set(fs, features_path);
    save_labels(ds, labels_path);
}

LabeledDataset load_dataset(const std::string& features_path,
                            const std::string& labels_path) {
    FeatureSet fs = load_feature_set(features_path);
    LabeledDataset ds;
    ds.features = std::move(fs.features);
    ds.domain = fs.label;
    ds.labels = load_labels(labels_path);
    if (ds.labels.size() != ds.features.rows) {
        throw std::runtime_error("label count does not match feature rows for " +
                                 features_path);
    }
    return ds;
}

}  // namespace gapsoup
