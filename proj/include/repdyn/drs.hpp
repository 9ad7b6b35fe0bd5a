#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repdyn/checkpoint.hpp"
#include "repdyn/plane.hpp"
#include "repdyn/probe.hpp"
#include "repdyn/similarity.hpp"

namespace repdyn {

/// Predicted class at every cell of one plane grid; labels(i, j) is the cell at (u_i, v_j).
struct LabelGrid {
    std::size_t plane_index = 0;
    Tensor labels;  // u32 [resolution, resolution]

    std::size_t resolution() const { return labels.dim(0); }
    std::uint32_t at(std::size_t i, std::size_t j) const { return labels.u32()[i * resolution() + j]; }
};

LabelGrid make_label_grid(std::size_t plane_index, std::size_t resolution, std::vector<std::uint32_t> labels);

struct FragmentationScore {
    std::vector<std::size_t> per_plane_counts;
    double mean = 0.0;
};

/// Maps input rows to a layer's activations (or, for output_label_map, to class scores).
using FeatureMap = std::function<Matrix(const Matrix&)>;

/// probe_predict(probe, features(point)) at every grid point.
LabelGrid label_map(const FeatureMap& features, const LinearProbe& probe, const PlaneGrid& grid,
                    std::size_t plane_index = 0);

/// Argmax of the classifier's scores at every grid point.
LabelGrid output_label_map(const FeatureMap& scores, const PlaneGrid& grid, std::size_t plane_index = 0);

/// Fraction of cells, over all planes, where the two label maps agree.
double drs(std::span<const LabelGrid> grids_a, std::span<const LabelGrid> grids_b);

/// Number of maximal 4-connected same-label components (union-find).
std::size_t fragment_count(const LabelGrid& grid);

FragmentationScore fragmentation_score(std::span<const LabelGrid> grids);

struct PlaneOptions {
    std::size_t resolution = kDefaultPlaneResolution;
    double margin = 0.1;
    // Clamp grid points into the dataset's pixel range when it declares one.
    bool clamp_to_pixel_range = true;
};

/// Plane specs for every triplet over the training inputs.
std::vector<PlaneSpec> make_plane_specs(const Matrix& train_x, const TripletSet& triplets);

/// Label maps indexed [epoch position in the store grid][plane]. An empty `probes` span selects
/// the full model output (layer is ignored); otherwise probes[e] belongs to grid epoch e.
/// Each (epoch, plane) map is computed exactly once.
using LabelMapCache = std::vector<std::vector<LabelGrid>>;
LabelMapCache compute_label_maps(const CheckpointStore& store, const std::string& layer,
                                 std::span<const LinearProbe> probes, const TripletSet& triplets,
                                 const PlaneOptions& options = {}, unsigned jobs = 0);

/// Stores each epoch's maps as one u32 [planes, resolution, resolution] tensor at dir/<epoch>.rdt.
void save_label_maps(const std::filesystem::path& dir, const EpochGrid& grid, const LabelMapCache& maps);
/// Reads the maps of every grid epoch back; a missing file is Error(missing_input).
LabelMapCache load_label_maps(const std::filesystem::path& dir, const EpochGrid& grid);

/// Pairwise DRS over cached label maps; symmetric with unit diagonal by construction.
SimilarityDiagram drs_diagram(const EpochGrid& grid, const LabelMapCache& maps, const std::string& layer,
                              const std::string& run_id, unsigned jobs = 0);

SimilarityDiagram drs_diagram(const CheckpointStore& store, const std::string& layer,
                              std::span<const LinearProbe> probes, const TripletSet& triplets,
                              const PlaneOptions& options = {}, unsigned jobs = 0);

}  // namespace repdyn
