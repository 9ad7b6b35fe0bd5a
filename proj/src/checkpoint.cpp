#include "repdyn/checkpoint.hpp"

#include <algorithm>

#include "repdyn/error.hpp"
#include "repdyn/model.hpp"
#include "repdyn/tensor_io.hpp"

namespace repdyn {

namespace fs = std::filesystem;

namespace layout {
fs::path run_json(const fs::path& root) { return root / "run.json"; }
fs::path labels(const fs::path& root) { return root / "labels.rdt"; }
fs::path train_labels(const fs::path& root) { return root / "train_labels.rdt"; }
fs::path errors_csv(const fs::path& root) { return root / "errors.csv"; }
fs::path epoch_dir(const fs::path& root, std::uint32_t epoch) { return root / "epochs" / std::to_string(epoch); }
fs::path activation(const fs::path& root, std::uint32_t epoch, const std::string& layer) {
    return epoch_dir(root, epoch) / (layer + ".rdt");
}
fs::path weights_dir(const fs::path& root, std::uint32_t epoch) { return root / "weights" / std::to_string(epoch); }
fs::path probe(const fs::path& root, const std::string& layer, std::uint32_t epoch) {
    return root / "probes" / layer / (std::to_string(epoch) + ".rdt");
}
}  // namespace layout

namespace {

std::vector<std::uint32_t> read_label_vector(const fs::path& path) {
    const Tensor t = read_tensor(path);
    if (t.dtype() != DType::u32 || t.ndim() != 1) {
        fail(ErrorKind::io, path.string() + ": expected a u32 label vector");
    }
    return {t.u32().begin(), t.u32().end()};
}

}  // namespace

bool CheckpointStore::has_layer(const std::string& layer) const {
    return std::find(layers_.begin(), layers_.end(), layer) != layers_.end();
}

std::vector<std::uint32_t> CheckpointStore::labels() const { return read_label_vector(layout::labels(root_)); }

std::vector<std::uint32_t> CheckpointStore::train_labels() const {
    return read_label_vector(layout::train_labels(root_));
}

RepresentationMatrix CheckpointStore::representation(std::uint32_t epoch, const std::string& layer) const {
    if (!has_layer(layer)) {
        fail(ErrorKind::missing_input, "store " + root_.string() + " has no layer '" + layer + "'");
    }
    if (!epoch_grid().contains(epoch)) {
        fail(ErrorKind::missing_input, "epoch " + std::to_string(epoch) + " is not on the store's grid");
    }
    RepresentationMatrix r{epoch, layer, read_tensor(layout::activation(root_, epoch, layer))};
    validate(r);
    return r;
}

Model CheckpointStore::model(std::uint32_t epoch) const {
    const auto& d = config_.dataset;
    Model m(config_.model, d.channels, d.height, d.width, config_.width_k, d.num_classes);
    m.load(layout::weights_dir(root_, epoch));
    return m;
}

CheckpointStore open_checkpoint_store(const fs::path& root) {
    if (!fs::is_regular_file(layout::run_json(root))) {
        fail(ErrorKind::missing_input, root.string() + ": run.json not found");
    }
    if (!fs::is_directory(root / "epochs")) {
        fail(ErrorKind::missing_input, root.string() + ": epochs/ directory not found");
    }
    CheckpointStore store;
    store.root_ = root;
    store.config_ = load_config(layout::run_json(root));
    store.layers_ = layer_names(store.config_.model);

    const TensorHeader lh = read_tensor_header(layout::labels(root));
    if (lh.dtype != DType::u32 || lh.shape.size() != 1) {
        fail(ErrorKind::io, layout::labels(root).string() + ": expected a u32 label vector");
    }
    store.m_ = lh.shape[0];

    for (std::uint32_t epoch : store.config_.epoch_grid) {
        if (!fs::is_directory(layout::epoch_dir(root, epoch))) {
            fail(ErrorKind::missing_input, "missing epoch directory for epoch " + std::to_string(epoch));
        }
        for (const auto& layer : store.layers_) {
            const auto path = layout::activation(root, epoch, layer);
            if (!fs::is_regular_file(path)) {
                fail(ErrorKind::missing_input,
                     "missing activation file for epoch " + std::to_string(epoch) + ", layer " + layer);
            }
            const TensorHeader h = read_tensor_header(path);
            if (h.dtype != DType::f32 || h.shape.size() != 2) {
                fail(ErrorKind::io, path.string() + ": activations must be a 2-D f32 tensor");
            }
            if (h.shape[0] != store.m_) {
                fail(ErrorKind::io, "inconsistent probe-set size: " + path.string() + " has " +
                                        std::to_string(h.shape[0]) + " rows but labels.rdt has " +
                                        std::to_string(store.m_));
            }
        }
    }
    return store;
}

}  // namespace repdyn
