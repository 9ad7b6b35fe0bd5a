#pragma once

#include <cstdint>
#include <vector>

#include "repdyn/config.hpp"
#include "repdyn/tensor.hpp"

namespace repdyn {

/// Flattened images (one per row, channel-major C*H*W) with class labels.
struct Dataset {
    Matrix train_x;
    std::vector<std::uint32_t> train_y;
    Matrix test_x;
    std::vector<std::uint32_t> test_y;
    std::uint32_t num_classes = 0;
    std::uint32_t channels = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
};

/// Class-prototype images: each class gets a random prototype in the pixel range and
/// every sample is its prototype plus Gaussian noise, clamped. Labels cycle through the
/// classes so splits are balanced. Deterministic in spec.seed.
Dataset make_synthetic_dataset(const DatasetSpec& spec);

/// Builds the synthetic set or reads the four tensor files named by the spec.
Dataset load_dataset(const DatasetSpec& spec);

}  // namespace repdyn
