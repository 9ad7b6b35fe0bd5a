#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repdyn/checkpoint.hpp"
#include "repdyn/config.hpp"

namespace repdyn {

/// Misclassified fractions per epoch, index 0 being the initialized network.
struct ErrorCurves {
    std::vector<double> train_error;
    std::vector<double> test_error;
    std::vector<double> subset_error;  // empty when no subset is tracked

    bool has_subset() const noexcept { return !subset_error.empty(); }
    std::size_t size() const noexcept { return train_error.size(); }
};

struct NoisyLabels {
    std::vector<std::uint32_t> labels;
    std::vector<std::size_t> flipped;  // ascending
};

/// Flips exactly round(fraction * n) distinct labels, each to a class drawn uniformly from the
/// other num_classes - 1.
NoisyLabels inject_label_noise(std::span<const std::uint32_t> labels, double fraction, std::uint32_t num_classes,
                               std::uint64_t seed);

double error_rate(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels);

/// Misclassified fraction restricted to `subset`.
double subset_error(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels,
                    std::span<const std::size_t> subset);

struct AtypicalSubset {
    std::vector<std::size_t> indices;  // ascending
    std::string warning;               // set when nothing crosses the threshold
};

/// Reads an "index,score" CSV (header optional) that must cover 0..n_train-1 exactly once and
/// keeps the indices whose score is strictly greater (or less) than the threshold.
AtypicalSubset load_atypical_subset(const std::filesystem::path& score_file, std::size_t n_train,
                                    double threshold = 0.5, SubsetDirection direction = SubsetDirection::greater);

/// First epoch whose train error is strictly below the threshold.
std::optional<std::uint32_t> detect_phase3(std::span<const double> train_error, double threshold = 0.001);

struct TrainResult {
    ErrorCurves curves;
    std::optional<std::uint32_t> phase3_epoch;
    std::vector<std::size_t> subset;
};

/// Trains the reference model and writes a complete checkpoint store under out_root.
/// An existing store in out_root is replaced; a nonempty directory without run.json is refused.
CheckpointStore train_run(const TrainRunConfig& cfg, const std::filesystem::path& out_root,
                          TrainResult* result = nullptr);

}  // namespace repdyn
