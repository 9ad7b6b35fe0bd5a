#include "repdyn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "repdyn/dataset.hpp"
#include "repdyn/diagram.hpp"
#include "repdyn/error.hpp"
#include "repdyn/model.hpp"
#include "repdyn/optim.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/tensor_io.hpp"

namespace repdyn {

namespace fs = std::filesystem;

NoisyLabels inject_label_noise(std::span<const std::uint32_t> labels, double fraction, std::uint32_t num_classes,
                               std::uint64_t seed) {
    require(fraction >= 0.0 && fraction < 1.0, "label noise fraction must be in [0, 1)");
    require(num_classes >= 2, "label noise needs at least 2 classes");
    const std::size_t n = labels.size();
    const auto flips = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    NoisyLabels out{{labels.begin(), labels.end()}, {}};
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(seed);
    // Partial Fisher-Yates: the first `flips` slots become a uniform sample without replacement.
    for (std::size_t i = 0; i < flips; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
        const std::size_t idx = order[i];
        require(labels[idx] < num_classes, "label out of range");
        const auto shift = 1 + static_cast<std::uint32_t>(rng.below(num_classes - 1));
        out.labels[idx] = (labels[idx] + shift) % num_classes;
    }
    out.flipped.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(flips));
    std::sort(out.flipped.begin(), out.flipped.end());
    return out;
}

double error_rate(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels) {
    require(predictions.size() == labels.size() && !labels.empty(), "error_rate: size mismatch or empty input");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        wrong += predictions[i] != labels[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double subset_error(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels,
                    std::span<const std::size_t> subset) {
    require(!subset.empty(), "subset_error: empty subset");
    require(predictions.size() == labels.size(), "subset_error: size mismatch");
    std::size_t wrong = 0;
    for (std::size_t i : subset) {
        require(i < labels.size(), "subset_error: index out of range");
        wrong += predictions[i] != labels[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(subset.size());
}

AtypicalSubset load_atypical_subset(const fs::path& score_file, std::size_t n_train, double threshold,
                                    SubsetDirection direction) {
    std::ifstream in(score_file);
    if (!in) {
        fail(ErrorKind::missing_input, "cannot open score file " + score_file.string());
    }
    std::vector<double> scores(n_train, 0.0);
    std::vector<bool> seen(n_train, false);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line_no == 1 && line.find_first_of("0123456789") != 0) {
            continue;  // header
        }
        const auto comma = line.find(',');
        std::size_t index = 0;
        double score = 0.0;
        try {
            if (comma == std::string::npos) throw std::invalid_argument("missing comma");
            std::size_t used = 0;
            index = std::stoull(line.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("bad index");
            const std::string rest = line.substr(comma + 1);
            score = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("bad score");
        } catch (const std::exception&) {
            fail(ErrorKind::config, score_file.string() + ":" + std::to_string(line_no) + ": malformed row '" + line + "'");
        }
        if (index >= n_train || seen[index]) {
            fail(ErrorKind::config, score_file.string() + ":" + std::to_string(line_no) + ": index " +
                                        std::to_string(index) + " out of range or repeated");
        }
        seen[index] = true;
        scores[index] = score;
    }
    const auto missing = std::find(seen.begin(), seen.end(), false);
    if (missing != seen.end()) {
        fail(ErrorKind::missing_input, score_file.string() + ": no score for index " +
                                           std::to_string(missing - seen.begin()));
    }
    AtypicalSubset out;
    for (std::size_t i = 0; i < n_train; ++i) {
        const bool take = direction == SubsetDirection::greater ? scores[i] > threshold : scores[i] < threshold;
        if (take) {
            out.indices.push_back(i);
        }
    }
    if (out.indices.empty()) {
        out.warning = "no score crosses threshold " + std::to_string(threshold) + "; atypical subset is empty";
    }
    return out;
}

std::optional<std::uint32_t> detect_phase3(std::span<const double> train_error, double threshold) {
    for (std::size_t t = 0; t < train_error.size(); ++t) {
        if (train_error[t] < threshold) {
            return static_cast<std::uint32_t>(t);
        }
    }
    return std::nullopt;
}

namespace {

void prepare_output(const fs::path& root) {
    std::error_code ec;
    if (fs::exists(root, ec) && !fs::is_empty(root, ec)) {
        if (!fs::is_regular_file(layout::run_json(root))) {
            fail(ErrorKind::io, root.string() + " is not empty and does not hold a checkpoint store");
        }
        for (const char* sub : {"epochs", "weights", "probes", "labelmaps"}) {
            fs::remove_all(root / sub, ec);
        }
    }
    fs::create_directories(root / "epochs", ec);
    if (ec || !fs::is_directory(root / "epochs")) {
        fail(ErrorKind::io, "cannot create output directory " + root.string() + (ec ? ": " + ec.message() : ""));
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        fail(ErrorKind::io, "cannot write " + path.string());
    }
}

Matrix take_rows(const Matrix& x, std::size_t n) {
    Matrix out(n, x.cols);
    std::copy(x.data.begin(), x.data.begin() + static_cast<std::ptrdiff_t>(n * x.cols), out.data.begin());
    return out;
}

Tensor label_tensor(std::span<const std::uint32_t> y) {
    return Tensor({y.size()}, std::vector<std::uint32_t>(y.begin(), y.end()));
}

}  // namespace

CheckpointStore train_run(const TrainRunConfig& cfg, const fs::path& out_root, TrainResult* result) {
    cfg.validate();
    const Dataset ds = load_dataset(cfg.dataset);
    require(ds.train_x.rows >= 1 && ds.test_x.rows >= 2, "dataset too small");

    std::vector<std::uint32_t> train_y = ds.train_y;
    std::vector<std::size_t> subset;
    if (cfg.label_noise_fraction > 0.0) {
        NoisyLabels noisy = inject_label_noise(ds.train_y, cfg.label_noise_fraction, ds.num_classes, cfg.seeds.noise);
        train_y = std::move(noisy.labels);
        subset = std::move(noisy.flipped);
    } else if (cfg.atypical) {
        subset = load_atypical_subset(cfg.atypical->score_file, ds.train_x.rows, cfg.atypical->threshold,
                                      cfg.atypical->direction)
                     .indices;
    }

    const std::size_t probe_m =
        cfg.probe_set_size == 0 ? ds.test_x.rows : std::min<std::size_t>(cfg.probe_set_size, ds.test_x.rows);
    require(probe_m >= 2, "probe set needs at least 2 examples");
    const Matrix probe_x = take_rows(ds.test_x, probe_m);

    prepare_output(out_root);
    write_text(layout::run_json(out_root), to_json(cfg).dump(2) + "\n");
    write_tensor(layout::labels(out_root), label_tensor(std::span(ds.test_y).first(probe_m)));
    write_tensor(layout::train_labels(out_root), label_tensor(train_y));

    Model model(cfg.model, ds.channels, ds.height, ds.width, cfg.width_k, ds.num_classes);
    model.initialize(cfg.seeds.init);
    auto& params = model.parameters();
    std::vector<bool> frozen(params.size(), false);
    for (std::size_t i = 0; i < params.size(); ++i) {
        frozen[i] = std::find(cfg.frozen_layers.begin(), cfg.frozen_layers.end(), params[i].layer) !=
                    cfg.frozen_layers.end();
    }
    Optimizer optimizer(cfg.optimizer, params.size());

    ErrorCurves curves;
    auto record = [&](std::uint32_t epoch) {
        const auto train_pred = model.predict(ds.train_x);
        curves.train_error.push_back(error_rate(train_pred, train_y));
        curves.test_error.push_back(error_rate(model.predict(ds.test_x), ds.test_y));
        if (!subset.empty()) {
            curves.subset_error.push_back(subset_error(train_pred, train_y, subset));
        }
        if (cfg.epoch_grid.contains(epoch)) {
            fs::create_directories(layout::epoch_dir(out_root, epoch));
            for (const auto& layer : model.layer_names()) {
                write_tensor(layout::activation(out_root, epoch, layer), to_f32_tensor(model.features(probe_x, layer)));
            }
            model.save(layout::weights_dir(out_root, epoch));
        }
    };

    record(0);
    std::vector<std::size_t> order(ds.train_x.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 shuffle_rng(cfg.seeds.shuffle);
    std::vector<std::vector<double>> grads;
    for (std::uint32_t epoch = 1; epoch <= cfg.total_epochs; ++epoch) {
        shuffle_rng.shuffle(std::span(order));
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min<std::size_t>(cfg.batch_size, order.size() - start);
            const double loss = model.loss_and_grad(ds.train_x, train_y, std::span(order).subspan(start, len), grads);
            if (!std::isfinite(loss)) {
                fail(ErrorKind::numeric, "training diverged: non-finite loss at epoch " + std::to_string(epoch));
            }
            for (std::size_t i = 0; i < params.size(); ++i) {
                if (!frozen[i]) {
                    optimizer.step(i, params[i].value, grads[i]);
                }
            }
        }
        record(epoch);
    }
    write_error_curves_csv(curves, layout::errors_csv(out_root));

    if (result) {
        result->phase3_epoch = detect_phase3(curves.train_error);
        result->curves = std::move(curves);
        result->subset = std::move(subset);
    }
    return open_checkpoint_store(out_root);
}

}  // namespace repdyn
