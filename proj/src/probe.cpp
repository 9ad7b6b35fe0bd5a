#include "repdyn/probe.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "repdyn/checkpoint.hpp"
#include "repdyn/dataset.hpp"
#include "repdyn/error.hpp"
#include "repdyn/model.hpp"
#include "repdyn/nn_math.hpp"
#include "repdyn/optim.hpp"
#include "repdyn/parallel.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/tensor_io.hpp"

namespace repdyn {

namespace {

// Accumulates loss and gradient for the given rows of x.
double accumulate(const Matrix& w, const Matrix& x, std::span<const std::uint32_t> y,
                  std::span<const std::size_t> rows, Matrix& grad) {
    const std::size_t classes = w.rows;
    const std::size_t p = w.cols;
    grad = Matrix(classes, p);
    std::vector<double> scores(classes), probs(classes);
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(rows.size());
    for (std::size_t r : rows) {
        if (y[r] >= classes) {
            fail(ErrorKind::invalid_argument, "probe label " + std::to_string(y[r]) + " out of range for " +
                                                  std::to_string(classes) + " classes");
        }
        const auto xr = x.row(r);
        for (std::size_t c = 0; c < classes; ++c) {
            const auto wr = w.row(c);
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                s += wr[k] * xr[k];
            }
            scores[c] = s;
        }
        loss += softmax_cross_entropy(scores, y[r], probs);
        probs[y[r]] -= 1.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double d = probs[c] * scale;
            auto gr = grad.row(c);
            for (std::size_t k = 0; k < p; ++k) {
                gr[k] += d * xr[k];
            }
        }
    }
    return loss * scale;
}

}  // namespace

OptimizerConfig ProbeTrainConfig::optimizer() const {
    OptimizerConfig o;
    o.kind = OptimizerKind::adam;
    o.learning_rate = learning_rate;
    o.beta1 = 0.9;
    o.beta2 = 0.999;
    o.epsilon = 1e-8;
    return o;
}

ProbeLossGrad probe_loss_grad(const Matrix& weights, const Matrix& x, std::span<const std::uint32_t> y) {
    require(weights.cols == x.cols, "probe dimension mismatch");
    require(x.rows == y.size() && !y.empty(), "probe batch and labels differ in length");
    std::vector<std::size_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    ProbeLossGrad out;
    out.loss = accumulate(weights, x, y, rows, out.grad);
    return out;
}

LinearProbe train_probe(const Matrix& features, std::span<const std::uint32_t> labels, std::uint32_t num_classes,
                        const ProbeTrainConfig& cfg, std::string layer_name, std::uint32_t source_epoch) {
    require(num_classes >= 2, "probe needs at least 2 classes");
    require(features.rows == labels.size() && features.rows > 0, "probe features and labels differ in length");
    require(cfg.batch_size >= 1 && cfg.epochs >= 1, "probe batch_size and epochs must be >= 1");
    for (double v : features.data) {
        if (!std::isfinite(v)) fail(ErrorKind::numeric, "probe features contain non-finite values");
    }
    const std::set<std::uint32_t> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) {
        fail(ErrorKind::invalid_argument, "probe labels contain a single class");
    }

    LinearProbe probe{Matrix(num_classes, features.cols), std::move(layer_name), source_epoch, cfg.shuffle_seed};
    const OptimizerConfig opt = cfg.optimizer();
    AdamState state;
    SplitMix64 rng(cfg.shuffle_seed);
    std::vector<std::size_t> order(features.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Matrix grad;
    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min<std::size_t>(cfg.batch_size, order.size() - start);
            accumulate(probe.weights, features, labels, std::span(order).subspan(start, len), grad);
            adam_step(probe.weights.data, grad.data, state, opt);
        }
    }
    return probe;
}

LinearProbe train_probe(const RepresentationMatrix& reps, std::span<const std::uint32_t> labels,
                        std::uint32_t num_classes, const ProbeTrainConfig& cfg) {
    validate(reps);
    return train_probe(to_matrix(reps.matrix), labels, num_classes, cfg, reps.layer_name, reps.epoch);
}

std::vector<std::uint32_t> probe_predict(const LinearProbe& probe, const Matrix& features) {
    require(features.cols == probe.input_dim(), "probe expects " + std::to_string(probe.input_dim()) +
                                                    " features, got " + std::to_string(features.cols));
    std::vector<std::uint32_t> out(features.rows);
    std::vector<double> scores(probe.num_classes());
    for (std::size_t r = 0; r < features.rows; ++r) {
        const auto xr = features.row(r);
        for (std::size_t c = 0; c < probe.num_classes(); ++c) {
            const auto wr = probe.weights.row(c);
            double s = 0.0;
            for (std::size_t k = 0; k < xr.size(); ++k) {
                s += wr[k] * xr[k];
            }
            scores[c] = s;
        }
        out[r] = argmax_lowest(scores);
    }
    return out;
}

std::vector<std::uint32_t> probe_predict(const LinearProbe& probe, const RepresentationMatrix& reps) {
    return probe_predict(probe, to_matrix(reps.matrix));
}

void save_probe(const std::filesystem::path& path, const LinearProbe& probe, const ProbeTrainConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    write_tensor(path, to_f64_tensor(probe.weights));
    nlohmann::json j = {{"layer", probe.layer_name},
                        {"epoch", probe.source_epoch},
                        {"seed", probe.train_seed},
                        {"learning_rate", cfg.learning_rate},
                        {"epochs", cfg.epochs},
                        {"batch_size", cfg.batch_size},
                        {"optimizer", "adam"},
                        {"beta1", 0.9},
                        {"beta2", 0.999},
                        {"epsilon", 1e-8},
                        {"bias", false},
                        {"init", "zeros"}};
    auto sidecar = path;
    sidecar.replace_extension(".json");
    std::ofstream out(sidecar, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) {
        fail(ErrorKind::io, "cannot write " + sidecar.string());
    }
}

LinearProbe load_probe(const std::filesystem::path& path) {
    const Tensor t = read_tensor(path);
    if (t.dtype() != DType::f64 || t.ndim() != 2) {
        fail(ErrorKind::io, path.string() + ": probe weights must be a 2-D f64 tensor");
    }
    LinearProbe probe{to_matrix(t), {}, 0, 0};
    auto sidecar = path;
    sidecar.replace_extension(".json");
    std::ifstream in(sidecar);
    if (in) {
        try {
            const auto j = nlohmann::json::parse(in);
            probe.layer_name = j.value("layer", std::string{});
            probe.source_epoch = j.value("epoch", 0u);
            probe.train_seed = j.value("seed", std::uint64_t{0});
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::io, sidecar.string() + ": " + e.what());
        }
    }
    return probe;
}

std::vector<LinearProbe> train_store_probes(const CheckpointStore& store, const std::string& layer,
                                            const ProbeTrainConfig& cfg, unsigned jobs) {
    if (!store.has_layer(layer)) {
        fail(ErrorKind::missing_input, "store has no layer '" + layer + "'");
    }
    const Dataset ds = load_dataset(store.config().dataset);
    const auto labels = store.train_labels();
    require(labels.size() == ds.train_x.rows, "train_labels.rdt does not match the training set");
    const auto& grid = store.epoch_grid();
    std::vector<LinearProbe> probes(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t e) {
        const Model model = store.model(grid[e]);
        probes[e] = train_probe(model.features(ds.train_x, layer), labels, ds.num_classes, cfg, layer, grid[e]);
    });
    return probes;
}

void save_store_probes(const CheckpointStore& store, std::span<const LinearProbe> probes, const ProbeTrainConfig& cfg) {
    for (const auto& p : probes) {
        save_probe(layout::probe(store.root(), p.layer_name, p.source_epoch), p, cfg);
    }
}

std::vector<LinearProbe> load_store_probes(const CheckpointStore& store, const std::string& layer) {
    std::vector<LinearProbe> probes;
    for (std::uint32_t epoch : store.epoch_grid()) {
        const auto path = layout::probe(store.root(), layer, epoch);
        if (!std::filesystem::is_regular_file(path)) {
            fail(ErrorKind::missing_input, "missing probe " + path.string() + " (run the probes command first)");
        }
        probes.push_back(load_probe(path));
        probes.back().layer_name = layer;
        probes.back().source_epoch = epoch;
    }
    return probes;
}

}  // namespace repdyn
