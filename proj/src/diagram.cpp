#include "repdyn/diagram.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "repdyn/error.hpp"
#include "repdyn/rng.hpp"

namespace repdyn {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::array<double, 3>, 5> kRamp = {{
    {13, 8, 135},
    {126, 3, 168},
    {204, 71, 120},
    {248, 149, 64},
    {240, 249, 33},
}};

std::uint8_t to_byte(double x) { return static_cast<std::uint8_t>(std::clamp(std::lround(x), 0L, 255L)); }

bool dash_on(std::uint32_t pos) { return (pos / 3) % 2 == 0; }

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) {
        fail(ErrorKind::io, "write failed for " + path.string());
    }
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::missing_input, "cannot open " + path.string());
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) rows.push_back(split(line));
    }
    return rows;
}

double parse_double(const std::string& s, const fs::path& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::config, path.string() + ": cannot parse number '" + s + "'");
    }
}

std::uint32_t parse_epoch(const std::string& s, const fs::path& path) {
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
        fail(ErrorKind::config, path.string() + ": cannot parse epoch '" + s + "'");
    }
}

// Cell index covering pixel offset `pos` given ascending cell start positions.
std::size_t cell_at(const std::vector<long>& starts, long pos) {
    auto it = std::upper_bound(starts.begin(), starts.end(), pos);
    return it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin() - 1);
}

}  // namespace

Rgb colormap(double t) {
    if (!(t >= 0.0)) t = 0.0;  // also maps NaN to the bottom color
    t = std::min(t, 1.0);
    const double x = t * 4.0;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(x), 3);
    const double f = x - static_cast<double>(k);
    const auto& a = kRamp[k];
    const auto& b = kRamp[k + 1];
    return {to_byte(a[0] + f * (b[0] - a[0])), to_byte(a[1] + f * (b[1] - a[1])), to_byte(a[2] + f * (b[2] - a[2]))};
}

Rgb Image::pixel(std::uint32_t x, std::uint32_t y) const {
    const std::size_t k = (std::size_t{y} * width + x) * 3;
    return {rgb[k], rgb[k + 1], rgb[k + 2]};
}

void Image::set(std::uint32_t x, std::uint32_t y, Rgb c) {
    const std::size_t k = (std::size_t{y} * width + x) * 3;
    rgb[k] = c.r;
    rgb[k + 1] = c.g;
    rgb[k + 2] = c.b;
}

std::vector<std::uint8_t> Image::encode_ppm() const {
    const std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), rgb.begin(), rgb.end());
    return out;
}

void write_ppm(const Image& image, const fs::path& path) {
    auto out = open_out(path);
    const auto bytes = image.encode_ppm();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    close_out(out, path);
}

std::vector<double> log_epoch_layout(const EpochGrid& grid, double width_px) {
    std::vector<double> pos;
    if (grid.empty()) {
        return pos;
    }
    const double span = std::log10(static_cast<double>(grid.back()) + 1.0);
    for (std::uint32_t t : grid) {
        pos.push_back(span > 0.0 ? std::log10(static_cast<double>(t) + 1.0) / span * (width_px - 1.0) : 0.0);
    }
    return pos;
}

namespace {

struct AxisLayout {
    std::vector<long> starts;   // first pixel of each cell along the axis
    std::vector<long> centres;  // marker / sidecar pixel of each cell
    std::uint32_t length = 0;
};

AxisLayout layout_axis(const EpochGrid& grid, const RenderSpec& spec) {
    AxisLayout a;
    if (spec.axis_mode == AxisMode::grid_index) {
        a.length = static_cast<std::uint32_t>(grid.size()) * spec.cell_px;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            a.starts.push_back(static_cast<long>(i * spec.cell_px));
            a.centres.push_back(static_cast<long>(i * spec.cell_px + spec.cell_px / 2));
        }
    } else {
        a.length = spec.width_px;
        for (double p : log_epoch_layout(grid, spec.width_px)) {
            a.starts.push_back(std::lround(p));
            a.centres.push_back(std::lround(p));
        }
    }
    return a;
}

void write_axis_csv(const EpochGrid& grid, const AxisLayout& a, const fs::path& path) {
    auto out = open_out(path);
    out << "epoch,pixel\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << grid[i] << "," << a.centres[i] << "\n";
    }
    close_out(out, path);
}

}  // namespace

Image render_heatmap_image(const SimilarityDiagram& d, const RenderSpec& spec) {
    require(spec.lo < spec.hi, "render range must satisfy lo < hi");
    require(spec.cell_px >= 1 && spec.width_px >= 1, "cell and image sizes must be >= 1 px");
    require(d.values.rows == d.row_epochs.size() && d.values.cols == d.col_epochs.size() && d.values.rows > 0 &&
                d.values.cols > 0,
            "diagram values do not match its epoch grids");
    for (const auto& a : spec.annotations) {
        if (!d.row_epochs.contains(a.epoch) && !d.col_epochs.contains(a.epoch)) {
            fail(ErrorKind::invalid_argument, "annotation epoch " + std::to_string(a.epoch) + " is not on the grid");
        }
    }
    const AxisLayout xs = layout_axis(d.col_epochs, spec);
    const AxisLayout ys = layout_axis(d.row_epochs, spec);
    Image img{xs.length, ys.length, std::vector<std::uint8_t>(std::size_t{xs.length} * ys.length * 3)};
    for (std::uint32_t y = 0; y < img.height; ++y) {
        const std::size_t i = cell_at(ys.starts, static_cast<long>(img.height - 1 - y));
        for (std::uint32_t x = 0; x < img.width; ++x) {
            const std::size_t j = cell_at(xs.starts, static_cast<long>(x));
            img.set(x, y, colormap((d.values(i, j) - spec.lo) / (spec.hi - spec.lo)));
        }
    }
    for (const auto& a : spec.annotations) {
        if (auto j = d.col_epochs.index_of(a.epoch)) {
            const auto x = static_cast<std::uint32_t>(std::clamp<long>(xs.centres[*j], 0, img.width - 1));
            for (std::uint32_t y = 0; y < img.height; ++y) {
                if (dash_on(y)) img.set(x, y, a.color);
            }
        }
        if (auto i = d.row_epochs.index_of(a.epoch)) {
            const auto yb = std::clamp<long>(ys.centres[*i], 0, img.height - 1);
            const auto y = static_cast<std::uint32_t>(img.height - 1 - yb);
            for (std::uint32_t x = 0; x < img.width; ++x) {
                if (dash_on(x)) img.set(x, y, a.color);
            }
        }
    }
    return img;
}

void render_heatmap(const SimilarityDiagram& d, const RenderSpec& spec, const fs::path& path) {
    write_ppm(render_heatmap_image(d, spec), path);
    write_axis_csv(d.col_epochs, layout_axis(d.col_epochs, spec), fs::path(path.string() + ".axis.csv"));
    if (d.row_epochs != d.col_epochs) {
        write_axis_csv(d.row_epochs, layout_axis(d.row_epochs, spec), fs::path(path.string() + ".yaxis.csv"));
    }
}

Rgb palette_color(std::uint32_t cls, std::uint64_t palette_seed) {
    require(cls < kPaletteSize, "class " + std::to_string(cls) + " exceeds the palette size " +
                                    std::to_string(kPaletteSize));
    SplitMix64 rng(palette_seed);
    const double offset = rng.uniform();
    // Golden-ratio hue steps with alternating saturation and value bands.
    double h = std::fmod(offset + 0.6180339887498949 * cls, 1.0) * 6.0;
    const double s = (cls % 2 == 0) ? 0.85 : 0.6;
    const double v = ((cls / 2) % 2 == 0) ? 0.95 : 0.7;
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = v, g = t, b = p; break;
        case 1: r = q, g = v, b = p; break;
        case 2: r = p, g = v, b = t; break;
        case 3: r = p, g = q, b = v; break;
        case 4: r = t, g = p, b = v; break;
        default: r = v, g = p, b = q; break;
    }
    return {to_byte(r * 255.0), to_byte(g * 255.0), to_byte(b * 255.0)};
}

Image render_plane_image(const LabelGrid& grid, std::uint64_t palette_seed, std::uint32_t cell_px) {
    require(cell_px >= 1, "cell size must be >= 1 px");
    const std::size_t n = grid.resolution();
    const auto labels = grid.labels.u32();
    const std::set<std::uint32_t> present(labels.begin(), labels.end());
    std::array<Rgb, kPaletteSize> colors{};
    for (std::uint32_t c : present) {
        colors[c] = palette_color(c, palette_seed);  // validates the class index
    }
    const auto side = static_cast<std::uint32_t>(n * cell_px);
    Image img{side, side + cell_px, std::vector<std::uint8_t>(std::size_t{side} * (side + cell_px) * 3)};
    for (std::uint32_t y = 0; y < side; ++y) {
        const std::size_t j = n - 1 - y / cell_px;
        for (std::uint32_t x = 0; x < side; ++x) {
            img.set(x, y, colors[grid.at(x / cell_px, j)]);
        }
    }
    const std::vector<std::uint32_t> legend(present.begin(), present.end());
    for (std::uint32_t x = 0; x < side; ++x) {
        const Rgb c = colors[legend[std::size_t{x} * legend.size() / side]];
        for (std::uint32_t y = side; y < img.height; ++y) {
            img.set(x, y, c);
        }
    }
    return img;
}

void render_plane(const LabelGrid& grid, std::uint64_t palette_seed, const fs::path& path, std::uint32_t cell_px) {
    write_ppm(render_plane_image(grid, palette_seed, cell_px), path);
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string diagram_filename(Metric metric, const std::string& layer) {
    return std::string(to_string(metric)) + "_" + layer + ".csv";
}

void write_diagram_csv(const SimilarityDiagram& d, const fs::path& path) {
    require(d.values.rows == d.row_epochs.size() && d.values.cols == d.col_epochs.size(),
            "diagram values do not match its epoch grids");
    auto out = open_out(path);
    out << "epoch";
    for (std::uint32_t e : d.col_epochs) {
        out << "," << e;
    }
    out << "\n";
    for (std::size_t i = 0; i < d.values.rows; ++i) {
        out << d.row_epochs[i];
        for (std::size_t j = 0; j < d.values.cols; ++j) {
            out << "," << format_value(d.values(i, j));
        }
        out << "\n";
    }
    close_out(out, path);
}

SimilarityDiagram read_diagram_csv(const fs::path& path) {
    const auto rows = read_rows(path);
    if (rows.size() < 2 || rows[0].size() < 2) {
        fail(ErrorKind::config, path.string() + ": diagram CSV needs a header row and at least one data row");
    }
    std::vector<std::uint32_t> cols;
    for (std::size_t j = 1; j < rows[0].size(); ++j) {
        cols.push_back(parse_epoch(rows[0][j], path));
    }
    std::vector<std::uint32_t> row_epochs;
    Matrix values(rows.size() - 1, cols.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != cols.size() + 1) {
            fail(ErrorKind::config, path.string() + ": row " + std::to_string(i) + " has the wrong number of cells");
        }
        row_epochs.push_back(parse_epoch(rows[i][0], path));
        for (std::size_t j = 0; j < cols.size(); ++j) {
            values(i - 1, j) = parse_double(rows[i][j + 1], path);
        }
    }
    SimilarityDiagram d;
    try {
        d.row_epochs = EpochGrid(std::move(row_epochs));
        d.col_epochs = EpochGrid(std::move(cols));
    } catch (const Error& e) {
        fail(ErrorKind::config, path.string() + ": " + e.what());
    }
    d.values = std::move(values);
    const std::string stem = path.stem().string();
    if (stem.rfind("drs_", 0) == 0) {
        d.metric = Metric::drs;
        d.layer_name = stem.substr(4);
    } else if (stem.rfind("cka_", 0) == 0) {
        d.layer_name = stem.substr(4);
    }
    return d;
}

void write_error_curves_csv(const ErrorCurves& curves, const fs::path& path) {
    require(!curves.train_error.empty(), "error curves are empty");
    require(curves.test_error.size() == curves.size() && (!curves.has_subset() || curves.subset_error.size() == curves.size()),
            "error curves differ in length");
    auto out = open_out(path);
    out << "epoch,train_error,test_error,subset_error\n";
    for (std::size_t t = 0; t < curves.size(); ++t) {
        out << t << "," << format_value(curves.train_error[t]) << "," << format_value(curves.test_error[t]) << ",";
        if (curves.has_subset()) {
            out << format_value(curves.subset_error[t]);
        }
        out << "\n";
    }
    close_out(out, path);
}

ErrorCurves read_error_curves_csv(const fs::path& path) {
    const auto rows = read_rows(path);
    if (rows.size() < 2) {
        fail(ErrorKind::config, path.string() + ": error CSV has no data rows");
    }
    ErrorCurves c;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4) {
            fail(ErrorKind::config, path.string() + ": row " + std::to_string(i) + " must have 4 fields");
        }
        c.train_error.push_back(parse_double(r[1], path));
        c.test_error.push_back(parse_double(r[2], path));
        if (!r[3].empty()) {
            c.subset_error.push_back(parse_double(r[3], path));
        }
    }
    if (c.has_subset() && c.subset_error.size() != c.size()) {
        fail(ErrorKind::config, path.string() + ": subset_error column is partially filled");
    }
    return c;
}

void write_fragmentation_csv(std::span<const FragmentationRow> rows, const fs::path& path) {
    require(!rows.empty(), "no fragmentation rows to export");
    const std::size_t planes = rows.front().score.per_plane_counts.size();
    for (const auto& r : rows) {
        require(r.score.per_plane_counts.size() == planes, "fragmentation rows differ in plane count");
    }
    auto out = open_out(path);
    out << "epoch,mean_fragments";
    for (std::size_t p = 0; p < planes; ++p) {
        out << ",plane_" << p;
    }
    out << "\n";
    for (const auto& r : rows) {
        out << r.epoch << "," << format_value(r.score.mean);
        for (auto c : r.score.per_plane_counts) {
            out << "," << c;
        }
        out << "\n";
    }
    close_out(out, path);
}

std::vector<FragmentationRow> read_fragmentation_csv(const fs::path& path) {
    const auto rows = read_rows(path);
    if (rows.size() < 2 || rows[0].size() < 3) {
        fail(ErrorKind::config, path.string() + ": fragmentation CSV needs a header and data rows");
    }
    std::vector<FragmentationRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != rows[0].size()) {
            fail(ErrorKind::config, path.string() + ": row " + std::to_string(i) + " has the wrong number of cells");
        }
        FragmentationRow row;
        row.epoch = parse_epoch(r[0], path);
        row.score.mean = parse_double(r[1], path);
        for (std::size_t k = 2; k < r.size(); ++k) {
            row.score.per_plane_counts.push_back(parse_epoch(r[k], path));
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace repdyn
