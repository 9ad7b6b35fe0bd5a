#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "repdyn/checkpoint.hpp"
#include "repdyn/cka.hpp"
#include "repdyn/config.hpp"
#include "repdyn/dataset.hpp"
#include "repdyn/diagram.hpp"
#include "repdyn/drs.hpp"
#include "repdyn/error.hpp"
#include "repdyn/plane.hpp"
#include "repdyn/probe.hpp"
#include "repdyn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace repdyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

int exit_code(ErrorKind k) {
    return k == ErrorKind::invalid_argument ? kExitConfig : static_cast<int>(k);
}

void write_echo(const fs::path& path, const std::string& command, const json& flags) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << json{{"command", command}, {"flags", flags}}.dump(2) << "\n";
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
}

fs::path sidecar(const fs::path& output, const std::string& suffix) { return fs::path(output.string() + suffix); }

// Options shared by commands that draw heatmaps.
struct RenderFlags {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::uint32_t> gray;
    std::vector<std::uint32_t> cyan;
    std::string phase3_from;
    bool log_axis = false;
    std::uint32_t cell_px = 4;
    std::uint32_t width_px = 512;

    void add(CLI::App* app) {
        app->add_option("--lo", lo, "Value mapped to the bottom of the color ramp")->capture_default_str();
        app->add_option("--hi", hi, "Value mapped to the top of the color ramp")->capture_default_str();
        app->add_option("--annotate", gray, "Epoch to mark with a gray dashed line (repeatable)");
        app->add_option("--annotate-cyan", cyan, "Epoch to mark with a cyan dashed line (repeatable)");
        app->add_option("--phase3-from", phase3_from,
                        "errors.csv whose first train error below 0.001 is marked in cyan (snapped to the next grid epoch)");
        app->add_flag("--log-axis", log_axis, "Place epochs at log10(t + 1) instead of one cell per grid epoch");
        app->add_option("--cell-px", cell_px, "Pixels per cell in grid-index mode")->capture_default_str();
        app->add_option("--width-px", width_px, "Image side in log-axis mode")->capture_default_str();
    }

    json to_json() const {
        return {{"lo", lo},           {"hi", hi},           {"annotate", gray},         {"annotate_cyan", cyan},
                {"phase3_from", phase3_from}, {"log_axis", log_axis}, {"cell_px", cell_px}, {"width_px", width_px}};
    }

    RenderSpec spec(const SimilarityDiagram& d) const {
        RenderSpec s;
        s.lo = lo;
        s.hi = hi;
        s.axis_mode = log_axis ? AxisMode::log_epoch : AxisMode::grid_index;
        s.cell_px = cell_px;
        s.width_px = width_px;
        for (auto e : gray) s.annotations.push_back({e, kGray});
        for (auto e : cyan) s.annotations.push_back({e, kCyan});
        if (!phase3_from.empty()) {
            const ErrorCurves curves = read_error_curves_csv(phase3_from);
            if (const auto t = detect_phase3(curves.train_error)) {
                const auto& g = d.col_epochs;
                const auto it = std::lower_bound(g.begin(), g.end(), *t);
                if (it != g.end()) {
                    s.annotations.push_back({*it, kCyan});
                    std::cerr << "phase III at epoch " << *t << ", marked at grid epoch " << *it << "\n";
                } else {
                    std::cerr << "phase III at epoch " << *t << " lies beyond the diagram grid; not marked\n";
                }
            } else {
                std::cerr << "train error never drops below 0.001; no phase III marker\n";
            }
        }
        return s;
    }
};

// ---- train ----

struct TrainFlags {
    std::string config;
    std::string out;
    std::optional<std::string> run_id, model, optimizer;
    std::optional<std::uint32_t> width, epochs, batch_size, grid_every, probe_set_size;
    std::optional<double> lr, momentum, epsilon, weight_decay, label_noise;
    std::optional<std::uint64_t> seed_init, seed_shuffle, seed_noise;
};

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

int cmd_train(const TrainFlags& f) {
    std::ifstream in(f.config);
    if (!in) fail(ErrorKind::missing_input, "cannot open config " + f.config);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, f.config + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::config, f.config + ": expected a JSON object");
    // Flags win over the file.
    put(j, "run_id", f.run_id);
    put(j, "model", f.model);
    put(j, "width_k", f.width);
    put(j, "total_epochs", f.epochs);
    put(j, "batch_size", f.batch_size);
    put(j, "probe_set_size", f.probe_set_size);
    put(j, "label_noise_fraction", f.label_noise);
    if (f.model) j.erase("layer_names");
    if (f.grid_every) j["epoch_grid"] = {{"every", *f.grid_every}};
    if (f.optimizer || f.lr || f.momentum || f.epsilon || f.weight_decay) {
        json& o = j["optimizer"];
        if (o.is_null()) o = json::object();
        put(o, "kind", f.optimizer);
        put(o, "learning_rate", f.lr);
        put(o, "momentum", f.momentum);
        put(o, "epsilon", f.epsilon);
        put(o, "weight_decay", f.weight_decay);
    }
    if (f.seed_init || f.seed_shuffle || f.seed_noise) {
        json& s = j["seeds"];
        if (s.is_null()) s = json::object();
        put(s, "init", f.seed_init);
        put(s, "shuffle", f.seed_shuffle);
        put(s, "noise", f.seed_noise);
    }
    const TrainRunConfig cfg = config_from_json(j);

    TrainResult result;
    const CheckpointStore store = train_run(cfg, f.out, &result);
    json flags = {{"config", f.config}, {"out", f.out}, {"effective_config", to_json(cfg)}};
    write_echo(fs::path(f.out) / "flags_train.json", "train", flags);
    std::cout << "store " << store.root().string() << ": " << store.epoch_grid().size() << " epochs, final train error "
              << format_value(result.curves.train_error.back()) << ", test error "
              << format_value(result.curves.test_error.back()) << "\n";
    if (result.phase3_epoch) {
        std::cout << "phase III (train error < 0.001) from epoch " << *result.phase3_epoch << "\n";
    } else {
        std::cout << "phase III not reached\n";
    }
    return kExitOk;
}

// ---- cka ----

struct CkaFlags {
    std::string store;
    std::string store2;
    std::string layer;
    std::size_t batches = 1;
    std::size_t batch_size = 0;
    std::string out;
    std::string ppm;
    unsigned jobs = 0;
    RenderFlags render;
};

int cmd_cka(const CkaFlags& f) {
    const CheckpointStore a = open_checkpoint_store(f.store);
    const CheckpointStore b = f.store2.empty() ? a : open_checkpoint_store(f.store2);
    const CkaBatchPlan plan = f.batches == 1 && f.batch_size == 0 ? full_batch_plan(a.probe_examples())
                                                                  : make_batch_plan(a.labels(), f.batches, f.batch_size);
    const SimilarityDiagram d = cka_diagram(a, b, f.layer, plan, f.jobs);
    const fs::path out = f.out.empty() ? a.root() / diagram_filename(Metric::cka, f.layer) : fs::path(f.out);
    write_diagram_csv(d, out);
    if (!f.ppm.empty()) render_heatmap(d, f.render.spec(d), f.ppm);
    json flags = {{"store", f.store},          {"store2", f.store2}, {"layer", f.layer},   {"batches", f.batches},
                  {"batch_size", f.batch_size}, {"out", out.string()}, {"ppm", f.ppm}, {"render", f.render.to_json()}};
    write_echo(sidecar(out, ".flags.json"), "cka", flags);
    std::cout << "wrote " << out.string() << " (" << d.values.rows << "x" << d.values.cols << ")\n";
    return kExitOk;
}

// ---- probes ----

struct ProbeFlags {
    std::string store;
    std::vector<std::string> layers;
    ProbeTrainConfig cfg;
    unsigned jobs = 0;
};

int cmd_probes(const ProbeFlags& f) {
    const CheckpointStore store = open_checkpoint_store(f.store);
    for (const auto& layer : f.layers) {
        const auto probes = train_store_probes(store, layer, f.cfg, f.jobs);
        save_store_probes(store, probes, f.cfg);
        json flags = {{"store", f.store},
                      {"layer", layer},
                      {"seed", f.cfg.shuffle_seed},
                      {"learning_rate", f.cfg.learning_rate},
                      {"epochs", f.cfg.epochs},
                      {"batch_size", f.cfg.batch_size}};
        write_echo(store.root() / "probes" / layer / "flags_probes.json", "probes", flags);
        std::cout << "trained " << probes.size() << " probes for layer " << layer << "\n";
    }
    return kExitOk;
}

// ---- drs / frag ----

struct PlaneFlags {
    std::size_t n_planes = kDefaultTripletCount;
    std::uint64_t triplet_seed = 0;
    std::string triplets;
    std::size_t resolution = kDefaultPlaneResolution;
    double margin = 0.1;
    bool no_clamp = false;

    void add(CLI::App* app) {
        app->add_option("--planes", n_planes, "Number of sampled triplet planes")->capture_default_str();
        app->add_option("--triplet-seed", triplet_seed, "Seed of the triplet sampler")->capture_default_str();
        app->add_option("--triplets", triplets, "Triplet cache CSV (default <store>/triplets_<seed>_<planes>.csv)");
        app->add_option("--resolution", resolution, "Grid points per plane side")->capture_default_str();
        app->add_option("--margin", margin, "Relative margin around the anchors' bounding box")->capture_default_str();
        app->add_flag("--no-clamp", no_clamp, "Do not clamp plane points into the dataset's pixel range");
    }

    std::string key() const { return std::to_string(triplet_seed) + "_" + std::to_string(n_planes); }

    fs::path triplet_path(const CheckpointStore& s) const {
        return triplets.empty() ? s.root() / ("triplets_" + key() + ".csv") : fs::path(triplets);
    }

    fs::path label_map_dir(const CheckpointStore& s, const std::string& layer) const {
        return s.root() / "labelmaps" / (key() + "_r" + std::to_string(resolution)) / layer;
    }

    json to_json() const {
        return {{"planes", n_planes},     {"triplet_seed", triplet_seed}, {"triplets", triplets},
                {"resolution", resolution}, {"margin", margin},           {"clamp", !no_clamp}};
    }
};

// Reuses a cached triplet set when it matches the seed and count; otherwise samples and caches.
TripletSet obtain_triplets(const CheckpointStore& store, const PlaneFlags& f) {
    const fs::path path = f.triplet_path(store);
    if (fs::is_regular_file(path)) {
        TripletSet cached = read_triplets_csv(path);
        if (cached.seed == f.triplet_seed && cached.triplets.size() == f.n_planes) {
            return cached;
        }
        if (!f.triplets.empty()) {
            fail(ErrorKind::config, path.string() + " holds a different seed or plane count");
        }
    }
    const Dataset ds = load_dataset(store.config().dataset);
    TripletSet set = sample_triplets(ds.train_x, f.n_planes, f.triplet_seed);
    write_triplets_csv(set, path);
    return set;
}

struct DrsFlags {
    std::string store;
    std::string layer;
    PlaneFlags planes;
    std::string out;
    std::string ppm;
    unsigned jobs = 0;
    RenderFlags render;
};

int cmd_drs(const DrsFlags& f) {
    const CheckpointStore store = open_checkpoint_store(f.store);
    const bool output = f.layer == "output";
    const std::vector<LinearProbe> probes = output ? std::vector<LinearProbe>{} : load_store_probes(store, f.layer);
    const TripletSet triplets = obtain_triplets(store, f.planes);
    PlaneOptions opt{f.planes.resolution, f.planes.margin, !f.planes.no_clamp};
    const LabelMapCache maps = compute_label_maps(store, f.layer, probes, triplets, opt, f.jobs);
    save_label_maps(f.planes.label_map_dir(store, f.layer), store.epoch_grid(), maps);
    const SimilarityDiagram d = drs_diagram(store.epoch_grid(), maps, f.layer, store.run_id(), f.jobs);
    const fs::path out = f.out.empty() ? store.root() / diagram_filename(Metric::drs, f.layer) : fs::path(f.out);
    write_diagram_csv(d, out);
    if (!f.ppm.empty()) render_heatmap(d, f.render.spec(d), f.ppm);
    json flags = {{"store", f.store}, {"layer", f.layer}, {"planes", f.planes.to_json()},
                  {"out", out.string()}, {"ppm", f.ppm},   {"render", f.render.to_json()}};
    write_echo(sidecar(out, ".flags.json"), "drs", flags);
    std::cout << "wrote " << out.string() << " (" << d.values.rows << "x" << d.values.cols << ")\n";
    return kExitOk;
}

struct FragFlags {
    std::string store;
    std::string layer;
    PlaneFlags planes;
    std::string out;
    std::string plane_dir;
    std::size_t plane_images = 4;
    std::uint64_t palette_seed = 0;
};

int cmd_frag(const FragFlags& f) {
    const CheckpointStore store = open_checkpoint_store(f.store);
    const LabelMapCache maps = load_label_maps(f.planes.label_map_dir(store, f.layer), store.epoch_grid());
    std::vector<FragmentationRow> rows;
    for (std::size_t e = 0; e < maps.size(); ++e) {
        rows.push_back({store.epoch_grid()[e], fragmentation_score(maps[e])});
    }
    const fs::path out = f.out.empty() ? store.root() / ("frag_" + f.layer + ".csv") : fs::path(f.out);
    write_fragmentation_csv(rows, out);
    if (!f.plane_dir.empty()) {
        std::error_code ec;
        fs::create_directories(f.plane_dir, ec);
        for (std::size_t e = 0; e < maps.size(); ++e) {
            for (std::size_t p = 0; p < std::min(f.plane_images, maps[e].size()); ++p) {
                const auto name = f.layer + "_e" + std::to_string(store.epoch_grid()[e]) + "_p" + std::to_string(p) + ".ppm";
                render_plane(maps[e][p], f.palette_seed, fs::path(f.plane_dir) / name);
            }
        }
    }
    json flags = {{"store", f.store},         {"layer", f.layer},
                  {"planes", f.planes.to_json()}, {"out", out.string()},
                  {"plane_dir", f.plane_dir}, {"plane_images", f.plane_images},
                  {"palette_seed", f.palette_seed}};
    write_echo(sidecar(out, ".flags.json"), "frag", flags);
    std::cout << "wrote " << out.string() << " (" << rows.size() << " epochs)\n";
    return kExitOk;
}

// ---- render ----

struct RenderCmdFlags {
    std::string csv;
    std::string out;
    RenderFlags render;
};

int cmd_render(const RenderCmdFlags& f) {
    const SimilarityDiagram d = read_diagram_csv(f.csv);
    render_heatmap(d, f.render.spec(d), f.out);
    write_echo(sidecar(f.out, ".flags.json"), "render", {{"csv", f.csv}, {"out", f.out}, {"render", f.render.to_json()}});
    std::cout << "wrote " << f.out << "\n";
    return kExitOk;
}

// ---- grid ----

struct GridFlags {
    std::uint32_t total = 4000;
    std::uint32_t step_mid = 3;
    std::uint32_t step_late = 5;
    std::uint32_t every = 0;
    std::string out;
};

int cmd_grid(const GridFlags& f) {
    const EpochGrid g = f.every ? uniform_epoch_grid(f.total, f.every) : dense_epoch_grid(f.total, f.step_mid, f.step_late);
    std::ostringstream text;
    for (auto t : g) text << t << "\n";
    json flags = {{"total", f.total}, {"step_mid", f.step_mid}, {"step_late", f.step_late}, {"every", f.every}};
    if (f.out.empty()) {
        std::cout << text.str();
        std::cerr << json{{"command", "grid"}, {"flags", flags}, {"count", g.size()}}.dump() << "\n";
    } else {
        std::ofstream o(f.out, std::ios::binary | std::ios::trunc);
        o << text.str();
        if (!o) fail(ErrorKind::io, "cannot write " + f.out);
        flags["out"] = f.out;
        write_echo(sidecar(f.out, ".flags.json"), "grid", flags);
        std::cout << g.size() << " epochs written to " << f.out << "\n";
    }
    return kExitOk;
}

// ---- noise-check ----

struct NoiseFlags {
    std::string config;
    std::optional<double> fraction;
    std::string out;
};

int cmd_noise_check(const NoiseFlags& f) {
    TrainRunConfig cfg = load_config(f.config);
    if (f.fraction) {
        cfg.label_noise_fraction = *f.fraction;
        cfg.validate();
    }
    const Dataset ds = load_dataset(cfg.dataset);
    const NoisyLabels noisy = inject_label_noise(ds.train_y, cfg.label_noise_fraction, ds.num_classes, cfg.seeds.noise);
    const std::size_t n = ds.train_y.size();
    const auto expected = static_cast<std::size_t>(std::llround(cfg.label_noise_fraction * static_cast<double>(n)));
    std::size_t changed = 0;
    std::vector<std::size_t> per_class(ds.num_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (noisy.labels[i] != ds.train_y[i]) {
            ++changed;
            ++per_class[noisy.labels[i]];
        }
    }
    const bool ok = changed == expected && noisy.flipped.size() == expected;
    std::cout << "n_train " << n << ", fraction " << cfg.label_noise_fraction << ", expected flips " << expected
              << ", changed labels " << changed << (ok ? " (ok)" : " (MISMATCH)") << "\n";
    std::cout << "noisy labels per class:";
    for (auto c : per_class) std::cout << " " << c;
    std::cout << "\n";
    if (!f.out.empty()) {
        std::ofstream o(f.out, std::ios::binary | std::ios::trunc);
        o << "index,original,noisy\n";
        for (std::size_t i : noisy.flipped) o << i << "," << ds.train_y[i] << "," << noisy.labels[i] << "\n";
        if (!o) fail(ErrorKind::io, "cannot write " + f.out);
        write_echo(sidecar(f.out, ".flags.json"), "noise-check",
                   {{"config", f.config}, {"fraction", cfg.label_noise_fraction}, {"seed", cfg.seeds.noise}, {"out", f.out}});
    }
    if (!ok) fail(ErrorKind::numeric, "label noise check failed");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Representation dynamics toolkit: train, compare and visualize checkpoints"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    TrainFlags tf;
    auto* train = app.add_subcommand("train", "Train the reference model and write a checkpoint store");
    train->add_option("--config", tf.config, "Run config JSON")->required();
    train->add_option("--out", tf.out, "Store directory")->required();
    train->add_option("--run-id", tf.run_id, "Override run_id");
    train->add_option("--model", tf.model, "Override model (conv2 | mlp)");
    train->add_option("--width", tf.width, "Override width_k");
    train->add_option("--epochs", tf.epochs, "Override total_epochs");
    train->add_option("--batch-size", tf.batch_size, "Override batch_size");
    train->add_option("--grid-every", tf.grid_every, "Checkpoint every N epochs");
    train->add_option("--probe-set-size", tf.probe_set_size, "Override probe_set_size");
    train->add_option("--optimizer", tf.optimizer, "Override optimizer kind (sgd | adam)");
    train->add_option("--lr", tf.lr, "Override learning rate");
    train->add_option("--momentum", tf.momentum, "Override SGD momentum");
    train->add_option("--epsilon", tf.epsilon, "Override Adam epsilon");
    train->add_option("--weight-decay", tf.weight_decay, "Override weight decay");
    train->add_option("--label-noise", tf.label_noise, "Override label noise fraction");
    train->add_option("--seed-init", tf.seed_init, "Override initialization seed");
    train->add_option("--seed-shuffle", tf.seed_shuffle, "Override minibatch shuffle seed");
    train->add_option("--seed-noise", tf.seed_noise, "Override label noise seed");
    unsigned train_jobs = 0;
    train->add_option("--jobs", train_jobs, "Accepted for symmetry; training is single-threaded");

    CkaFlags cf;
    auto* cka = app.add_subcommand("cka", "CKA similarity diagram of one layer across epochs");
    cka->add_option("--store", cf.store, "Checkpoint store (rows)")->required();
    cka->add_option("--store2", cf.store2, "Second store (columns) for cross-run diagrams");
    cka->add_option("--layer", cf.layer, "Layer name")->required();
    cka->add_option("--batches", cf.batches, "Number of class-stratified CKA batches")->capture_default_str();
    cka->add_option("--batch-size", cf.batch_size, "Examples per batch (0 = probe examples / batches)")->capture_default_str();
    cka->add_option("--out", cf.out, "Output CSV (default <store>/cka_<layer>.csv)");
    cka->add_option("--ppm", cf.ppm, "Also render a heatmap to this PPM");
    cka->add_option("--jobs", cf.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    cf.render.add(cka);

    ProbeFlags pf;
    auto* probes = app.add_subcommand("probes", "Train one linear probe per grid epoch");
    probes->add_option("--store", pf.store, "Checkpoint store")->required();
    probes->add_option("--layer", pf.layers, "Layer name (repeatable)")->required();
    probes->add_option("--seed", pf.cfg.shuffle_seed, "Minibatch shuffle seed")->capture_default_str();
    probes->add_option("--lr", pf.cfg.learning_rate, "Adam learning rate")->capture_default_str();
    probes->add_option("--epochs", pf.cfg.epochs, "Training epochs")->capture_default_str();
    probes->add_option("--batch-size", pf.cfg.batch_size, "Minibatch size")->capture_default_str();
    probes->add_option("--jobs", pf.jobs, "Worker threads (0 = all cores)")->capture_default_str();

    DrsFlags df;
    auto* drs = app.add_subcommand("drs", "Decision region similarity diagram over sampled planes");
    drs->add_option("--store", df.store, "Checkpoint store")->required();
    drs->add_option("--layer", df.layer, "Probed layer, or 'output' for the model's own predictions")->required();
    df.planes.add(drs);
    drs->add_option("--out", df.out, "Output CSV (default <store>/drs_<layer>.csv)");
    drs->add_option("--ppm", df.ppm, "Also render a heatmap to this PPM");
    drs->add_option("--jobs", df.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    df.render.add(drs);

    FragFlags ff;
    auto* frag = app.add_subcommand("frag", "Fragmentation scores from the label maps saved by drs");
    frag->add_option("--store", ff.store, "Checkpoint store")->required();
    frag->add_option("--layer", ff.layer, "Layer used with drs")->required();
    ff.planes.add(frag);
    frag->add_option("--out", ff.out, "Output CSV (default <store>/frag_<layer>.csv)");
    frag->add_option("--plane-dir", ff.plane_dir, "Directory for plane label-map images");
    frag->add_option("--plane-images", ff.plane_images, "Planes rendered per epoch")->capture_default_str();
    frag->add_option("--palette-seed", ff.palette_seed, "Class palette seed")->capture_default_str();
    unsigned frag_jobs = 0;
    frag->add_option("--jobs", frag_jobs, "Accepted for symmetry; counting is single-threaded");

    RenderCmdFlags rf;
    auto* render = app.add_subcommand("render", "Render a diagram CSV as a PPM heatmap");
    render->add_option("--csv", rf.csv, "Diagram CSV")->required();
    render->add_option("--out", rf.out, "Output PPM")->required();
    rf.render.add(render);
    unsigned render_jobs = 0;
    render->add_option("--jobs", render_jobs, "Accepted for symmetry; rendering is single-threaded");

    GridFlags gf;
    auto* grid = app.add_subcommand("grid", "Print the checkpoint epoch grid, one epoch per line");
    grid->add_option("--total", gf.total, "Epochs below this bound are listed")->capture_default_str();
    grid->add_option("--step-mid", gf.step_mid, "Step between epochs 300 and 900")->capture_default_str();
    grid->add_option("--step-late", gf.step_late, "Step from epoch 900 on")->capture_default_str();
    grid->add_option("--every", gf.every, "Uniform grid 0, N, 2N, ... up to --total instead");
    grid->add_option("--out", gf.out, "Write the list to a file instead of stdout");
    unsigned grid_jobs = 0;
    grid->add_option("--jobs", grid_jobs, "Accepted for symmetry");

    NoiseFlags nf;
    auto* noise = app.add_subcommand("noise-check", "Inject label noise as training would and verify the flip count");
    noise->add_option("--config", nf.config, "Run config JSON")->required();
    noise->add_option("--fraction", nf.fraction, "Override label noise fraction");
    noise->add_option("--out", nf.out, "CSV of flipped indices");
    unsigned noise_jobs = 0;
    noise->add_option("--jobs", noise_jobs, "Accepted for symmetry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*train) return cmd_train(tf);
        if (*cka) return cmd_cka(cf);
        if (*probes) return cmd_probes(pf);
        if (*drs) return cmd_drs(df);
        if (*frag) return cmd_frag(ff);
        if (*render) return cmd_render(rf);
        if (*grid) return cmd_grid(gf);
        if (*noise) return cmd_noise_check(nf);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
