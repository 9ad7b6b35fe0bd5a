#include <doctest.h>

#include "repdyn/diagram.hpp"
#include "repdyn/error.hpp"
#include "test_support.hpp"

using namespace repdyn;
using testing::TempDir;

namespace {

SimilarityDiagram square(std::vector<std::uint32_t> epochs, std::vector<double> values) {
    const std::size_t n = epochs.size();
    SimilarityDiagram d;
    d.row_epochs = EpochGrid(epochs);
    d.col_epochs = EpochGrid(epochs);
    d.values = Matrix(n, n);
    d.values.data = std::move(values);
    d.metric = Metric::cka;
    d.layer_name = "conv1";
    d.run_id_row = d.run_id_col = "r";
    return d;
}

constexpr Rgb kBottom{13, 8, 135};
constexpr Rgb kTop{240, 249, 33};

}  // namespace

TEST_CASE("colormap hits the five anchors and clamps") {
    CHECK(colormap(0.0) == kBottom);
    CHECK(colormap(0.25) == Rgb{126, 3, 168});
    CHECK(colormap(0.5) == Rgb{204, 71, 120});
    CHECK(colormap(0.75) == Rgb{248, 149, 64});
    CHECK(colormap(1.0) == kTop);
    CHECK(colormap(-3.0) == kBottom);
    CHECK(colormap(7.0) == kTop);
}

TEST_CASE("1x1 and 2x2 heatmaps") {
    RenderSpec spec;
    spec.cell_px = 3;
    const Image one = render_heatmap_image(square({0}, {1.0}), spec);
    CHECK(one.width == 3);
    CHECK(one.height == 3);
    for (std::uint32_t y = 0; y < 3; ++y)
        for (std::uint32_t x = 0; x < 3; ++x) CHECK(one.pixel(x, y) == kTop);

    // row 0 at the bottom: the identity shows up on the anti-diagonal of the raster
    const Image two = render_heatmap_image(square({0, 5}, {1, 0, 0, 1}), spec);
    CHECK(two.pixel(0, 5) == kTop);  // bottom-left: (row 0, col 0)
    CHECK(two.pixel(5, 0) == kTop);  // top-right: (row 1, col 1)
    CHECK(two.pixel(0, 0) == kBottom);
    CHECK(two.pixel(5, 5) == kBottom);
}

TEST_CASE("PPM encoding and byte-identical re-rendering") {
    TempDir dir("diag");
    RenderSpec spec;
    spec.cell_px = 2;
    spec.annotations = {{5, kCyan}};
    const auto d = square({0, 5, 10}, {1, .5, .2, .5, 1, .7, .2, .7, 1});
    render_heatmap(d, spec, dir / "a.ppm");
    render_heatmap(d, spec, dir / "b.ppm");
    const auto a = testing::slurp(dir / "a.ppm");
    CHECK(a == testing::slurp(dir / "b.ppm"));
    CHECK(a.rfind("P6\n6 6\n255\n", 0) == 0);
    CHECK(a.size() == 11 + 6 * 6 * 3);
    CHECK(testing::slurp(dir / "a.ppm.axis.csv") == "epoch,pixel\n0,1\n5,3\n10,5\n");
    CHECK(!std::filesystem::exists(dir / "a.ppm.yaxis.csv"));

    const Image img = render_heatmap_image(d, spec);
    CHECK(img.pixel(3, 0) == kCyan);  // vertical dashed line through column 1's centre
    CHECK(img.pixel(0, 2) == kCyan);  // horizontal line for row 1 (y = 5 - 3)

    spec.annotations = {{7, kGray}};
    CHECK_THROWS_AS(render_heatmap_image(d, spec), Error);
    spec.annotations.clear();
    spec.lo = spec.hi = 0.5;
    CHECK_THROWS_AS(render_heatmap_image(d, spec), Error);
}

TEST_CASE("log-epoch layout") {
    const auto p = log_epoch_layout(EpochGrid({0, 9, 99}), 201);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(log_epoch_layout(EpochGrid({0}), 100) == std::vector<double>{0.0});
    const auto q = log_epoch_layout(dense_epoch_grid(4000), 1000);
    for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i] > q[i - 1]);
}

TEST_CASE("diagram CSV layout and parse-back") {
    TempDir dir("diag");
    SplitMix64 rng(51);
    std::vector<double> v(16);
    for (auto& x : v) x = rng.uniform();
    const auto d = square({0, 1, 2, 50}, v);
    const auto path = dir / diagram_filename(Metric::cka, "conv1");
    CHECK(path.filename() == "cka_conv1.csv");
    write_diagram_csv(d, path);
    const auto back = read_diagram_csv(path);
    CHECK(back.row_epochs == d.row_epochs);
    CHECK(back.col_epochs == d.col_epochs);
    CHECK(back.metric == Metric::cka);
    CHECK(back.layer_name == "conv1");
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(back.values.data[i] - v[i]) <= 5e-7);

    write_diagram_csv(square({3, 4}, {1, 0.25, 0.25, 1}), dir / "small.csv");
    CHECK(testing::slurp(dir / "small.csv") == "epoch,3,4\n3,1.000000,0.250000\n4,0.250000,1.000000\n");
}

TEST_CASE("error curve and fragmentation CSVs") {
    TempDir dir("diag");
    ErrorCurves c{{0.9, 0.5, 0.0}, {0.9, 0.6, 0.4}, {}};
    write_error_curves_csv(c, dir / "e.csv");
    CHECK(testing::slurp(dir / "e.csv") ==
          "epoch,train_error,test_error,subset_error\n0,0.900000,0.900000,\n1,0.500000,0.600000,\n2,0.000000,0.400000,\n");
    const auto back = read_error_curves_csv(dir / "e.csv");
    CHECK(back.train_error == c.train_error);
    CHECK(!back.has_subset());
    CHECK_THROWS_AS(write_error_curves_csv(ErrorCurves{}, dir / "x.csv"), Error);

    const std::vector<FragmentationRow> rows{{0, {{3, 5}, 4.0}}, {10, {{1, 2}, 1.5}}};
    write_fragmentation_csv(rows, dir / "f.csv");
    CHECK(testing::slurp(dir / "f.csv") == "epoch,mean_fragments,plane_0,plane_1\n0,4.000000,3,5\n10,1.500000,1,2\n");
    const auto fb = read_fragmentation_csv(dir / "f.csv");
    REQUIRE(fb.size() == 2);
    CHECK(fb[1].score.per_plane_counts == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(write_fragmentation_csv(std::vector<FragmentationRow>{}, dir / "y.csv"), Error);
}

TEST_CASE("plane rendering: solid, split and legend") {
    const auto constant = make_label_grid(0, 4, std::vector<std::uint32_t>(16, 2));
    const Image solid = render_plane_image(constant, 1, 2);
    CHECK(solid.width == 8);
    CHECK(solid.height == 10);
    for (std::uint32_t y = 0; y < solid.height; ++y)
        for (std::uint32_t x = 0; x < solid.width; ++x) CHECK(solid.pixel(x, y) == palette_color(2, 1));

    std::vector<std::uint32_t> half(16);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) half[i * 4 + j] = i < 2 ? 0 : 5;
    const Image split = render_plane_image(make_label_grid(0, 4, half), 1, 1);
    CHECK(split.pixel(0, 0) == palette_color(0, 1));
    CHECK(split.pixel(3, 3) == palette_color(5, 1));
    CHECK(split.pixel(0, 4) == palette_color(0, 1));
    CHECK(split.pixel(3, 4) == palette_color(5, 1));
    CHECK(render_plane_image(make_label_grid(0, 4, half), 1, 1).rgb == split.rgb);

    CHECK(!(palette_color(0, 1) == palette_color(1, 1)));
    CHECK_THROWS_AS(render_plane_image(make_label_grid(0, 2, {0, 64, 1, 1}), 1), Error);
}
