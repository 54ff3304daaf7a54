#pragma once

#include <string>
#include <vector>

#include "gapsoup/matrix.hpp"

namespace gapsoup {

struct LabeledDataset {
    Matrix features;                 // N x dim
    std::vector<std::size_t> labels; // class indices, length N
    std::string domain;              // "real" | "generated"
    std::string split;               // "train" | "val" | "test"

    std::size_t size() const { return features.rows; }
};

}  // namespace gapsoup
