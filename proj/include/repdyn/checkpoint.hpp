#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "repdyn/config.hpp"
#include "repdyn/epoch_grid.hpp"
#include "repdyn/tensor.hpp"

namespace repdyn {

class Model;

// Store layout under root:
//   run.json                       training config (plus "layer_names")
//   labels.rdt                     u32 labels of the probe set (m rows)
//   train_labels.rdt               u32 training labels as used in training (after noise)
//   errors.csv                     epoch,train_error,test_error,subset_error
//   epochs/<t>/<layer>.rdt         f32 [m, p_layer] activations on the probe set
//   weights/<t>/<param>.rdt        f64 model parameters at epoch t
//   probes/<layer>/<t>.rdt|.json   linear probes (written by the probes command)
namespace layout {
std::filesystem::path run_json(const std::filesystem::path& root);
std::filesystem::path labels(const std::filesystem::path& root);
std::filesystem::path train_labels(const std::filesystem::path& root);
std::filesystem::path errors_csv(const std::filesystem::path& root);
std::filesystem::path epoch_dir(const std::filesystem::path& root, std::uint32_t epoch);
std::filesystem::path activation(const std::filesystem::path& root, std::uint32_t epoch, const std::string& layer);
std::filesystem::path weights_dir(const std::filesystem::path& root, std::uint32_t epoch);
std::filesystem::path probe(const std::filesystem::path& root, const std::string& layer, std::uint32_t epoch);
}  // namespace layout

/// Validated, immutable handle on a checkpoint directory.
class CheckpointStore {
public:
    const std::filesystem::path& root() const noexcept { return root_; }
    const TrainRunConfig& config() const noexcept { return config_; }
    const EpochGrid& epoch_grid() const noexcept { return config_.epoch_grid; }
    const std::vector<std::string>& layer_names() const noexcept { return layers_; }
    const std::string& run_id() const noexcept { return config_.run_id; }
    std::size_t probe_examples() const noexcept { return m_; }
    bool has_layer(const std::string& layer) const;

    std::vector<std::uint32_t> labels() const;
    std::vector<std::uint32_t> train_labels() const;
    RepresentationMatrix representation(std::uint32_t epoch, const std::string& layer) const;
    /// Model with the parameters saved at `epoch`.
    Model model(std::uint32_t epoch) const;

    friend CheckpointStore open_checkpoint_store(const std::filesystem::path& root);

private:
    std::filesystem::path root_;
    TrainRunConfig config_;
    std::vector<std::string> layers_;
    std::size_t m_ = 0;
};

/// Opens a store and checks that every (grid epoch, layer) activation file exists and
/// that all of them, and labels.rdt, agree on the number of probe examples.
CheckpointStore open_checkpoint_store(const std::filesystem::path& root);

}  // namespace repdyn
