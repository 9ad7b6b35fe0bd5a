#pragma once

#include <array>
#include <filesystem>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "repdyn/tensor.hpp"

namespace repdyn {

using Triplet = std::array<std::size_t, 3>;

/// Fixed set of training-example triplets, reused by every decision-region experiment.
struct TripletSet {
    std::uint64_t seed = 0;
    std::vector<Triplet> triplets;

    friend bool operator==(const TripletSet&, const TripletSet&) = default;
};

/// Plane through three input-space points, with origin at the first and an orthonormal
/// Gram-Schmidt basis (u along x2 - x1).
struct PlaneSpec {
    Triplet anchor_indices{};
    std::vector<double> origin;
    std::vector<double> basis_u;
    std::vector<double> basis_v;
    std::array<std::array<double, 2>, 3> anchor_coords{};

    std::size_t dim() const noexcept { return origin.size(); }
};

struct PlaneExtent {
    double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
};

struct PixelRange {
    double lo = 0.0;
    double hi = 1.0;
};

/// Uniform resolution x resolution sample of a plane, inclusive of the extent's edges.
/// Row i * resolution + j of `points` is origin + u_i * basis_u + v_j * basis_v.
struct PlaneGrid {
    PlaneSpec spec;
    std::size_t resolution = 50;
    PlaneExtent extent;
    Matrix points;

    double u(std::size_t i) const;
    double v(std::size_t j) const;
    std::size_t cells() const noexcept { return resolution * resolution; }
};

inline constexpr std::size_t kDefaultPlaneResolution = 50;
inline constexpr std::size_t kDefaultTripletCount = 500;

/// Throws Error(invalid_argument) when the points are collinear, i.e. the residual of
/// x3 - x1 against u has norm <= 1e-8 * |x3 - x1|, or when x2 == x1.
PlaneSpec make_plane(std::span<const double> x1, std::span<const double> x2, std::span<const double> x3,
                     Triplet indices = {0, 1, 2});

/// Extent is the anchors' bounding box widened by margin * (box width, box height) on each side.
/// With `clamp`, every coordinate of every point is clamped into the pixel range.
PlaneGrid sample_grid(const PlaneSpec& spec, std::size_t resolution = kDefaultPlaneResolution, double margin = 0.1,
                      std::optional<PixelRange> clamp = std::nullopt);

/// Draws n_q triplets of distinct row indices of `data` from a SplitMix64 stream, rejecting
/// (and redrawing) collinear ones. Fails after 10 * n_q rejections.
TripletSet sample_triplets(const Matrix& data, std::size_t n_q, std::uint64_t seed);

/// Triplet cache: first line "seed,<seed>", then one "i1,i2,i3" row per triplet.
void write_triplets_csv(const TripletSet& set, const std::filesystem::path& path);
TripletSet read_triplets_csv(const std::filesystem::path& path);

}  // namespace repdyn
