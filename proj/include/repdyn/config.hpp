#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "repdyn/epoch_grid.hpp"

namespace repdyn {

enum class ModelKind { conv2, mlp };
enum class OptimizerKind { sgd, adam };
enum class SubsetDirection { greater, less };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double momentum = 0.0;  // sgd only, heavy-ball
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
    // Off: weight decay is added to the gradient (coupled L2). On: applied directly to the
    // weights before the optimizer update.
    bool decoupled_weight_decay = false;

    void validate() const;
    friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Either a seeded synthetic image set or four REPDYN01 files on disk.
struct DatasetSpec {
    std::string kind = "synthetic";
    std::uint32_t num_classes = 10;
    std::uint32_t channels = 1;
    std::uint32_t height = 8;
    std::uint32_t width = 8;
    // synthetic
    std::uint32_t n_train = 1000;
    std::uint32_t n_test = 500;
    double noise_std = 0.25;
    std::uint64_t seed = 7;
    // files: inputs f32 [n, C*H*W] or [n, C, H, W]; labels u32 [n]
    std::string train_inputs;
    std::string train_labels;
    std::string test_inputs;
    std::string test_labels;
    // pixel range; when bounded, plane grid points are clamped into it
    bool bounded_pixels = true;
    double pixel_min = 0.0;
    double pixel_max = 1.0;

    std::uint32_t input_dim() const { return channels * height * width; }
    void validate() const;
    friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct SeedConfig {
    std::uint64_t init = 1;
    std::uint64_t shuffle = 2;
    std::uint64_t noise = 3;
    friend bool operator==(const SeedConfig&, const SeedConfig&) = default;
};

struct AtypicalConfig {
    std::string score_file;
    double threshold = 0.5;
    SubsetDirection direction = SubsetDirection::greater;
    friend bool operator==(const AtypicalConfig&, const AtypicalConfig&) = default;
};

struct TrainRunConfig {
    std::string run_id = "run";
    ModelKind model = ModelKind::conv2;
    std::uint32_t width_k = 8;
    DatasetSpec dataset;
    OptimizerConfig optimizer;
    std::uint32_t batch_size = 128;
    std::uint32_t total_epochs = 200;
    double label_noise_fraction = 0.0;
    SeedConfig seeds;
    // Every epoch unless given; config files may use {"every": n} or "dense".
    EpochGrid epoch_grid = uniform_epoch_grid(200, 1);
    // Number of leading test examples whose activations are dumped; 0 means all.
    std::uint32_t probe_set_size = 0;
    // Layers whose parameters are never updated.
    std::vector<std::string> frozen_layers;
    std::optional<AtypicalConfig> atypical;

    void validate() const;
    friend bool operator==(const TrainRunConfig&, const TrainRunConfig&) = default;
};

/// Analysed layers of a model, in forward order.
std::vector<std::string> layer_names(ModelKind model);

const char* to_string(ModelKind m);
const char* to_string(OptimizerKind k);

nlohmann::json to_json(const TrainRunConfig& cfg);

/// Parses and validates a config. Epoch grids may be given as an explicit list,
/// {"every": n}, or "dense" / {"dense": {"step_mid": 3, "step_late": 5}}. Unknown keys
/// are rejected. Throws Error(config) on any problem.
TrainRunConfig config_from_json(const nlohmann::json& j);
TrainRunConfig config_from_text(const std::string& text);
TrainRunConfig load_config(const std::filesystem::path& path);

}  // namespace repdyn
