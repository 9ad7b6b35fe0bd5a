#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repdyn/drs.hpp"
#include "repdyn/similarity.hpp"
#include "repdyn/trainer.hpp"

namespace repdyn {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kGray{128, 128, 128};
inline constexpr Rgb kCyan{0, 255, 255};

/// Five-anchor ramp (0, .25, .5, .75, 1) interpolated linearly in RGB; t is clamped to [0, 1].
Rgb colormap(double t);

enum class AxisMode { grid_index, log_epoch };

/// Dashed marker lines at an epoch, drawn across both axes where the epoch is on the grid.
struct Annotation {
    std::uint32_t epoch = 0;
    Rgb color = kGray;
};

struct RenderSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<Annotation> annotations;
    AxisMode axis_mode = AxisMode::grid_index;
    std::uint32_t cell_px = 4;     // grid-index mode
    std::uint32_t width_px = 512;  // log-epoch mode: side of the square image
};

struct Image {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> rgb;  // row-major from the top, 3 bytes per pixel

    Rgb pixel(std::uint32_t x, std::uint32_t y) const;
    void set(std::uint32_t x, std::uint32_t y, Rgb c);
    std::vector<std::uint8_t> encode_ppm() const;
};

void write_ppm(const Image& image, const std::filesystem::path& path);

/// Pixel positions in [0, width_px - 1] proportional to log10(t + 1), scaled so the last epoch
/// lands on width_px - 1. A single-epoch grid maps to 0.
std::vector<double> log_epoch_layout(const EpochGrid& grid, double width_px);

/// Matrix row 0 is drawn at the bottom and column 0 at the left.
Image render_heatmap_image(const SimilarityDiagram& d, const RenderSpec& spec);

/// Writes the PPM plus "<path>.axis.csv" (epoch,pixel for the column axis; pixel is the cell
/// centre from the left) and, for rectangular diagrams with distinct row grids,
/// "<path>.yaxis.csv" (pixel from the bottom).
void render_heatmap(const SimilarityDiagram& d, const RenderSpec& spec, const std::filesystem::path& path);

inline constexpr std::size_t kPaletteSize = 64;

/// Deterministic class color from the palette seed.
Rgb palette_color(std::uint32_t cls, std::uint64_t palette_seed);

/// One cell_px block per cell (u to the right, v upward) plus a legend strip underneath that
/// splits the width among the classes present, in ascending order.
Image render_plane_image(const LabelGrid& grid, std::uint64_t palette_seed, std::uint32_t cell_px = 4);
void render_plane(const LabelGrid& grid, std::uint64_t palette_seed, const std::filesystem::path& path,
                  std::uint32_t cell_px = 4);

/// Fixed six-decimal formatting used by every CSV export.
std::string format_value(double v);

/// Header row "epoch,<col epochs...>", then "<row epoch>,<values...>".
void write_diagram_csv(const SimilarityDiagram& d, const std::filesystem::path& path);
SimilarityDiagram read_diagram_csv(const std::filesystem::path& path);

/// Conventional file name "<metric>_<layer>.csv".
std::string diagram_filename(Metric metric, const std::string& layer);

/// Columns epoch,train_error,test_error,subset_error (empty subset field when untracked).
void write_error_curves_csv(const ErrorCurves& curves, const std::filesystem::path& path);
ErrorCurves read_error_curves_csv(const std::filesystem::path& path);

struct FragmentationRow {
    std::uint32_t epoch = 0;
    FragmentationScore score;
};

/// Columns epoch,mean_fragments,plane_0,...,plane_{N-1}.
void write_fragmentation_csv(std::span<const FragmentationRow> rows, const std::filesystem::path& path);
std::vector<FragmentationRow> read_fragmentation_csv(const std::filesystem::path& path);

}  // namespace repdyn
