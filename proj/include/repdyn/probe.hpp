#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "repdyn/config.hpp"
#include "repdyn/tensor.hpp"

namespace repdyn {

/// Probe training recipe. Defaults: Adam(0.9, 0.999, 1e-8) at lr 1e-4, cross-entropy, 10 epochs.
struct ProbeTrainConfig {
    double learning_rate = 1e-4;
    std::uint32_t epochs = 10;
    std::uint32_t batch_size = 128;
    std::uint64_t shuffle_seed = 0;

    OptimizerConfig optimizer() const;
    friend bool operator==(const ProbeTrainConfig&, const ProbeTrainConfig&) = default;
};

/// Linear map from a frozen layer's activations to class scores (no bias term).
struct LinearProbe {
    Matrix weights;  // [num_classes, p]
    std::string layer_name;
    std::uint32_t source_epoch = 0;
    std::uint64_t train_seed = 0;

    std::size_t num_classes() const noexcept { return weights.rows; }
    std::size_t input_dim() const noexcept { return weights.cols; }
};

struct ProbeLossGrad {
    double loss = 0.0;
    Matrix grad;  // same shape as the weights
};

/// Mean softmax cross-entropy of W x over the rows of x, and its gradient
/// mean((softmax(Wx) - onehot(y)) x^T).
ProbeLossGrad probe_loss_grad(const Matrix& weights, const Matrix& x, std::span<const std::uint32_t> y);

/// Trains from zero-initialized weights with the shared Adam step; minibatch order comes from a
/// SplitMix64 shuffle seeded by cfg.shuffle_seed. Deterministic in (features, labels, cfg).
LinearProbe train_probe(const Matrix& features, std::span<const std::uint32_t> labels, std::uint32_t num_classes,
                        const ProbeTrainConfig& cfg, std::string layer_name = {}, std::uint32_t source_epoch = 0);
LinearProbe train_probe(const RepresentationMatrix& reps, std::span<const std::uint32_t> labels,
                        std::uint32_t num_classes, const ProbeTrainConfig& cfg);

/// Per-row argmax of W x; ties go to the lowest class index.
std::vector<std::uint32_t> probe_predict(const LinearProbe& probe, const Matrix& features);
std::vector<std::uint32_t> probe_predict(const LinearProbe& probe, const RepresentationMatrix& reps);

/// Writes the weights as an f64 tensor plus a JSON sidecar (same stem, .json) with the recipe.
void save_probe(const std::filesystem::path& path, const LinearProbe& probe, const ProbeTrainConfig& cfg);
LinearProbe load_probe(const std::filesystem::path& path);

class CheckpointStore;

/// One probe per grid epoch of `store`, each trained on the layer's features of the clean
/// training inputs (recomputed from the saved weights) against the labels used in training.
std::vector<LinearProbe> train_store_probes(const CheckpointStore& store, const std::string& layer,
                                            const ProbeTrainConfig& cfg, unsigned jobs = 0);

/// Writes probes/<layer>/<epoch>.rdt (+ .json) for every probe.
void save_store_probes(const CheckpointStore& store, std::span<const LinearProbe> probes, const ProbeTrainConfig& cfg);

/// Reads back one probe per grid epoch; a missing file is Error(missing_input).
std::vector<LinearProbe> load_store_probes(const CheckpointStore& store, const std::string& layer);

}  // namespace repdyn
