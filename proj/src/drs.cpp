#include "repdyn/drs.hpp"

#include <numeric>
#include <set>

#include "repdyn/dataset.hpp"
#include "repdyn/error.hpp"
#include "repdyn/model.hpp"
#include "repdyn/nn_math.hpp"
#include "repdyn/parallel.hpp"
#include "repdyn/tensor_io.hpp"

namespace repdyn {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent_[std::max(a, b)] = std::min(a, b);
        }
    }

private:
    std::vector<std::size_t> parent_;
};

void check_grid(const LabelGrid& g) {
    require(g.labels.dtype() == DType::u32 && g.labels.ndim() == 2 && g.labels.dim(0) == g.labels.dim(1),
            "label grid must be a square u32 tensor");
}

}  // namespace

LabelGrid make_label_grid(std::size_t plane_index, std::size_t resolution, std::vector<std::uint32_t> labels) {
    return {plane_index, Tensor({resolution, resolution}, std::move(labels))};
}

LabelGrid label_map(const FeatureMap& features, const LinearProbe& probe, const PlaneGrid& grid,
                    std::size_t plane_index) {
    const Matrix f = features(grid.points);
    require(f.rows == grid.cells(), "feature map returned the wrong number of rows");
    return make_label_grid(plane_index, grid.resolution, probe_predict(probe, f));
}

LabelGrid output_label_map(const FeatureMap& scores, const PlaneGrid& grid, std::size_t plane_index) {
    const Matrix s = scores(grid.points);
    require(s.rows == grid.cells(), "classifier returned the wrong number of rows");
    std::vector<std::uint32_t> labels(s.rows);
    for (std::size_t r = 0; r < s.rows; ++r) {
        labels[r] = argmax_lowest(s.row(r));
    }
    return make_label_grid(plane_index, grid.resolution, std::move(labels));
}

double drs(std::span<const LabelGrid> grids_a, std::span<const LabelGrid> grids_b) {
    require(!grids_a.empty(), "drs needs at least one plane");
    require(grids_a.size() == grids_b.size(), "drs: plane counts differ");
    std::uint64_t agree = 0;
    std::uint64_t total = 0;
    for (std::size_t p = 0; p < grids_a.size(); ++p) {
        check_grid(grids_a[p]);
        check_grid(grids_b[p]);
        require(grids_a[p].labels.shape() == grids_b[p].labels.shape(), "drs: grid shapes differ");
        const auto a = grids_a[p].labels.u32();
        const auto b = grids_b[p].labels.u32();
        for (std::size_t k = 0; k < a.size(); ++k) {
            agree += a[k] == b[k];
        }
        total += a.size();
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

std::size_t fragment_count(const LabelGrid& grid) {
    check_grid(grid);
    const std::size_t n = grid.resolution();
    const auto l = grid.labels.u32();
    DisjointSets sets(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = i * n + j;
            if (i + 1 < n && l[k] == l[k + n]) sets.unite(k, k + n);
            if (j + 1 < n && l[k] == l[k + 1]) sets.unite(k, k + 1);
        }
    }
    std::size_t count = 0;
    for (std::size_t k = 0; k < n * n; ++k) {
        count += sets.find(k) == k;
    }
    return count;
}

FragmentationScore fragmentation_score(std::span<const LabelGrid> grids) {
    require(!grids.empty(), "fragmentation_score needs at least one grid");
    FragmentationScore s;
    std::size_t total = 0;
    for (const auto& g : grids) {
        s.per_plane_counts.push_back(fragment_count(g));
        total += s.per_plane_counts.back();
    }
    s.mean = static_cast<double>(total) / static_cast<double>(grids.size());
    return s;
}

std::vector<PlaneSpec> make_plane_specs(const Matrix& train_x, const TripletSet& triplets) {
    std::vector<PlaneSpec> specs;
    specs.reserve(triplets.triplets.size());
    for (const auto& t : triplets.triplets) {
        for (auto i : t) {
            require(i < train_x.rows, "triplet index " + std::to_string(i) + " out of range");
        }
        specs.push_back(make_plane(train_x.row(t[0]), train_x.row(t[1]), train_x.row(t[2]), t));
    }
    return specs;
}

LabelMapCache compute_label_maps(const CheckpointStore& store, const std::string& layer,
                                 std::span<const LinearProbe> probes, const TripletSet& triplets,
                                 const PlaneOptions& options, unsigned jobs) {
    const auto& grid = store.epoch_grid();
    const bool output = probes.empty();
    if (!output) {
        if (!store.has_layer(layer)) {
            fail(ErrorKind::missing_input, "store has no layer '" + layer + "'");
        }
        if (probes.size() != grid.size()) {
            fail(ErrorKind::missing_input, "expected one probe per grid epoch (" + std::to_string(grid.size()) +
                                               "), got " + std::to_string(probes.size()));
        }
    }
    require(!triplets.triplets.empty(), "triplet set is empty");
    const auto& dspec = store.config().dataset;
    const Dataset ds = load_dataset(dspec);
    const auto specs = make_plane_specs(ds.train_x, triplets);
    std::optional<PixelRange> clamp;
    if (options.clamp_to_pixel_range && dspec.bounded_pixels) {
        clamp = PixelRange{dspec.pixel_min, dspec.pixel_max};
    }

    std::vector<Model> models;
    models.reserve(grid.size());
    for (std::uint32_t epoch : grid) {
        models.push_back(store.model(epoch));
    }

    const std::size_t planes = specs.size();
    LabelMapCache cache(grid.size(), std::vector<LabelGrid>(planes));
    parallel_for(grid.size() * planes, jobs, [&](std::size_t idx) {
        const std::size_t e = idx / planes;
        const std::size_t p = idx % planes;
        const PlaneGrid pg = sample_grid(specs[p], options.resolution, options.margin, clamp);
        const Model& model = models[e];
        if (output) {
            cache[e][p] = output_label_map([&](const Matrix& x) { return model.logits(x); }, pg, p);
        } else {
            cache[e][p] = label_map([&](const Matrix& x) { return model.features(x, layer); }, probes[e], pg, p);
        }
    });
    return cache;
}

void save_label_maps(const std::filesystem::path& dir, const EpochGrid& grid, const LabelMapCache& maps) {
    require(maps.size() == grid.size(), "label-map cache does not match the epoch grid");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    }
    for (std::size_t e = 0; e < grid.size(); ++e) {
        require(!maps[e].empty(), "no label maps for epoch " + std::to_string(grid[e]));
        const std::size_t n = maps[e][0].resolution();
        std::vector<std::uint32_t> all;
        all.reserve(maps[e].size() * n * n);
        for (const auto& g : maps[e]) {
            require(g.resolution() == n, "label maps differ in resolution");
            all.insert(all.end(), g.labels.u32().begin(), g.labels.u32().end());
        }
        write_tensor(dir / (std::to_string(grid[e]) + ".rdt"), Tensor({maps[e].size(), n, n}, std::move(all)));
    }
}

LabelMapCache load_label_maps(const std::filesystem::path& dir, const EpochGrid& grid) {
    LabelMapCache maps;
    for (std::uint32_t epoch : grid) {
        const auto path = dir / (std::to_string(epoch) + ".rdt");
        if (!std::filesystem::is_regular_file(path)) {
            fail(ErrorKind::missing_input, "missing label maps " + path.string() + " (run the drs command first)");
        }
        const Tensor t = read_tensor(path);
        if (t.dtype() != DType::u32 || t.ndim() != 3 || t.dim(1) != t.dim(2)) {
            fail(ErrorKind::io, path.string() + ": label maps must be a u32 [planes, n, n] tensor");
        }
        const std::size_t n = t.dim(1);
        const auto v = t.u32();
        std::vector<LabelGrid> planes;
        for (std::size_t p = 0; p < t.dim(0); ++p) {
            planes.push_back(make_label_grid(p, n, {v.begin() + p * n * n, v.begin() + (p + 1) * n * n}));
        }
        maps.push_back(std::move(planes));
    }
    return maps;
}

SimilarityDiagram drs_diagram(const EpochGrid& grid, const LabelMapCache& maps, const std::string& layer,
                              const std::string& run_id, unsigned jobs) {
    require(maps.size() == grid.size(), "label-map cache does not match the epoch grid");
    const std::size_t n = grid.size();
    SimilarityDiagram d{grid, grid, Matrix(n, n), Metric::drs, layer, run_id, run_id};
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    parallel_for(pairs.size(), jobs, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const double v = drs(maps[i], maps[j]);
        d.values(i, j) = v;
        d.values(j, i) = v;
    });
    return d;
}

SimilarityDiagram drs_diagram(const CheckpointStore& store, const std::string& layer,
                              std::span<const LinearProbe> probes, const TripletSet& triplets,
                              const PlaneOptions& options, unsigned jobs) {
    if (probes.empty()) {
        fail(ErrorKind::missing_input, "no probes supplied for layer '" + layer + "'");
    }
    const auto maps = compute_label_maps(store, layer, probes, triplets, options, jobs);
    return drs_diagram(store.epoch_grid(), maps, layer, store.run_id(), jobs);
}

}  // namespace repdyn
