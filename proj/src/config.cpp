#include "repdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "repdyn/error.hpp"

namespace repdyn {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::config, what); }

// Reads fields from a JSON object and rejects keys that were never asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) {
            config_error(where_ + ": expected a JSON object");
        }
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            config_error(where_ + "." + key + ": " + e.what());
        }
    }

    const json* raw(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                config_error(where_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

ModelKind parse_model(const std::string& s) {
    if (s == "conv2") return ModelKind::conv2;
    if (s == "mlp") return ModelKind::mlp;
    config_error("unknown model '" + s + "' (expected conv2 or mlp)");
}

OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    config_error("unknown optimizer '" + s + "' (expected sgd or adam)");
}

SubsetDirection parse_direction(const std::string& s) {
    if (s == "greater") return SubsetDirection::greater;
    if (s == "less") return SubsetDirection::less;
    config_error("unknown direction '" + s + "' (expected greater or less)");
}

EpochGrid parse_grid(const json& j, std::uint32_t total_epochs) {
    try {
        if (j.is_array()) {
            return EpochGrid(j.get<std::vector<std::uint32_t>>());
        }
        if (j.is_string() && j.get<std::string>() == "dense") {
            return dense_epoch_grid(total_epochs);
        }
        if (j.is_object() && j.contains("every")) {
            return uniform_epoch_grid(total_epochs, j.at("every").get<std::uint32_t>());
        }
        if (j.is_object() && j.contains("dense")) {
            const auto& p = j.at("dense");
            return dense_epoch_grid(total_epochs, p.value("step_mid", 3u), p.value("step_late", 5u));
        }
    } catch (const json::exception& e) {
        config_error(std::string("epoch_grid: ") + e.what());
    } catch (const Error& e) {
        config_error(std::string("epoch_grid: ") + e.what());
    }
    config_error("epoch_grid: expected a list, \"dense\", {\"every\": n} or {\"dense\": {...}}");
}

}  // namespace

std::vector<std::string> layer_names(ModelKind model) {
    switch (model) {
        case ModelKind::conv2: return {"conv1", "fc"};
        case ModelKind::mlp: return {"fc1", "fc"};
    }
    return {};
}

const char* to_string(ModelKind m) { return m == ModelKind::conv2 ? "conv2" : "mlp"; }
const char* to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

void OptimizerConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) config_error("optimizer.learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) config_error("optimizer.momentum must be in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) config_error("optimizer.beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) config_error("optimizer.beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) config_error("optimizer.epsilon must be > 0");
    if (!(weight_decay >= 0.0)) config_error("optimizer.weight_decay must be >= 0");
}

void DatasetSpec::validate() const {
    if (kind != "synthetic" && kind != "files") config_error("dataset.kind must be synthetic or files");
    if (num_classes < 2) config_error("dataset.num_classes must be >= 2");
    if (channels < 1 || height < 1 || width < 1) config_error("dataset image dimensions must be >= 1");
    if (kind == "synthetic") {
        if (n_train < 3 || n_test < 2) config_error("dataset needs n_train >= 3 and n_test >= 2");
        if (!(noise_std >= 0.0)) config_error("dataset.noise_std must be >= 0");
    } else if (train_inputs.empty() || train_labels.empty() || test_inputs.empty() || test_labels.empty()) {
        config_error("files dataset needs train_inputs, train_labels, test_inputs, test_labels");
    }
    if (bounded_pixels && !(pixel_min < pixel_max)) config_error("dataset pixel range must satisfy min < max");
}

void TrainRunConfig::validate() const {
    dataset.validate();
    optimizer.validate();
    if (width_k < 1) config_error("width_k must be >= 1");
    if (batch_size < 1) config_error("batch_size must be >= 1");
    if (!(label_noise_fraction >= 0.0 && label_noise_fraction < 1.0)) {
        config_error("label_noise_fraction must be in [0, 1)");
    }
    if (epoch_grid.empty()) config_error("epoch_grid is empty");
    if (epoch_grid.back() > total_epochs) {
        config_error("epoch_grid contains epoch " + std::to_string(epoch_grid.back()) + " beyond total_epochs " +
                     std::to_string(total_epochs));
    }
    const auto layers = layer_names(model);
    for (const auto& f : frozen_layers) {
        if (std::find(layers.begin(), layers.end(), f) == layers.end()) {
            config_error("frozen layer '" + f + "' is not a layer of model " + to_string(model));
        }
    }
    if (run_id.empty()) config_error("run_id must be nonempty");
}

json to_json(const TrainRunConfig& c) {
    json j;
    j["run_id"] = c.run_id;
    j["model"] = to_string(c.model);
    j["layer_names"] = layer_names(c.model);
    j["width_k"] = c.width_k;
    const auto& d = c.dataset;
    j["dataset"] = {{"kind", d.kind},
                    {"num_classes", d.num_classes},
                    {"channels", d.channels},
                    {"height", d.height},
                    {"width", d.width},
                    {"n_train", d.n_train},
                    {"n_test", d.n_test},
                    {"noise_std", d.noise_std},
                    {"seed", d.seed},
                    {"train_inputs", d.train_inputs},
                    {"train_labels", d.train_labels},
                    {"test_inputs", d.test_inputs},
                    {"test_labels", d.test_labels},
                    {"bounded_pixels", d.bounded_pixels},
                    {"pixel_min", d.pixel_min},
                    {"pixel_max", d.pixel_max}};
    const auto& o = c.optimizer;
    j["optimizer"] = {{"kind", to_string(o.kind)},
                      {"learning_rate", o.learning_rate},
                      {"momentum", o.momentum},
                      {"beta1", o.beta1},
                      {"beta2", o.beta2},
                      {"epsilon", o.epsilon},
                      {"weight_decay", o.weight_decay},
                      {"decoupled_weight_decay", o.decoupled_weight_decay}};
    j["batch_size"] = c.batch_size;
    j["total_epochs"] = c.total_epochs;
    j["label_noise_fraction"] = c.label_noise_fraction;
    j["seeds"] = {{"init", c.seeds.init}, {"shuffle", c.seeds.shuffle}, {"noise", c.seeds.noise}};
    j["epoch_grid"] = c.epoch_grid.epochs();
    j["probe_set_size"] = c.probe_set_size;
    j["frozen_layers"] = c.frozen_layers;
    if (c.atypical) {
        j["atypical"] = {{"score_file", c.atypical->score_file},
                         {"threshold", c.atypical->threshold},
                         {"direction", c.atypical->direction == SubsetDirection::greater ? "greater" : "less"}};
    }
    return j;
}

TrainRunConfig config_from_json(const json& j) {
    TrainRunConfig c;
    ObjectReader top(j, "config");
    top.get("run_id", c.run_id);
    std::string model = to_string(c.model);
    top.get("model", model);
    c.model = parse_model(model);
    top.get("width_k", c.width_k);
    if (const json* lj = top.raw("layer_names")) {
        std::vector<std::string> names;
        try {
            names = lj->get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            config_error(std::string("layer_names: ") + e.what());
        }
        if (names != layer_names(c.model)) {
            config_error("layer_names do not match model " + model);
        }
    }
    if (const json* dj = top.raw("dataset")) {
        ObjectReader r(*dj, "dataset");
        auto& d = c.dataset;
        r.get("kind", d.kind);
        r.get("num_classes", d.num_classes);
        r.get("channels", d.channels);
        r.get("height", d.height);
        r.get("width", d.width);
        r.get("n_train", d.n_train);
        r.get("n_test", d.n_test);
        r.get("noise_std", d.noise_std);
        r.get("seed", d.seed);
        r.get("train_inputs", d.train_inputs);
        r.get("train_labels", d.train_labels);
        r.get("test_inputs", d.test_inputs);
        r.get("test_labels", d.test_labels);
        r.get("bounded_pixels", d.bounded_pixels);
        r.get("pixel_min", d.pixel_min);
        r.get("pixel_max", d.pixel_max);
        r.finish();
    }
    if (const json* oj = top.raw("optimizer")) {
        ObjectReader r(*oj, "optimizer");
        auto& o = c.optimizer;
        std::string kind = to_string(o.kind);
        r.get("kind", kind);
        o.kind = parse_optimizer(kind);
        r.get("learning_rate", o.learning_rate);
        r.get("momentum", o.momentum);
        r.get("beta1", o.beta1);
        r.get("beta2", o.beta2);
        r.get("epsilon", o.epsilon);
        r.get("weight_decay", o.weight_decay);
        r.get("decoupled_weight_decay", o.decoupled_weight_decay);
        r.finish();
    }
    top.get("batch_size", c.batch_size);
    top.get("total_epochs", c.total_epochs);
    top.get("label_noise_fraction", c.label_noise_fraction);
    if (const json* sj = top.raw("seeds")) {
        ObjectReader r(*sj, "seeds");
        r.get("init", c.seeds.init);
        r.get("shuffle", c.seeds.shuffle);
        r.get("noise", c.seeds.noise);
        r.finish();
    }
    if (const json* gj = top.raw("epoch_grid")) {
        c.epoch_grid = parse_grid(*gj, c.total_epochs);
    } else {
        c.epoch_grid = uniform_epoch_grid(c.total_epochs, 1);
    }
    top.get("probe_set_size", c.probe_set_size);
    top.get("frozen_layers", c.frozen_layers);
    if (const json* aj = top.raw("atypical"); aj && !aj->is_null()) {
        ObjectReader r(*aj, "atypical");
        AtypicalConfig a;
        r.get("score_file", a.score_file);
        r.get("threshold", a.threshold);
        std::string dir = "greater";
        r.get("direction", dir);
        a.direction = parse_direction(dir);
        r.finish();
        if (a.score_file.empty()) config_error("atypical.score_file is required");
        c.atypical = a;
    }
    top.finish();
    c.validate();
    return c;
}

TrainRunConfig config_from_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    return config_from_json(j);
}

TrainRunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::missing_input, "cannot open config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return config_from_text(ss.str());
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace repdyn
