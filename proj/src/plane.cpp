#include "repdyn/plane.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "repdyn/error.hpp"
#include "repdyn/rng.hpp"

namespace repdyn {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

[[noreturn]] void collinear(const Triplet& t) {
    fail(ErrorKind::invalid_argument, "collinear triplet (" + std::to_string(t[0]) + ", " + std::to_string(t[1]) +
                                          ", " + std::to_string(t[2]) + ")");
}

}  // namespace

double PlaneGrid::u(std::size_t i) const {
    return extent.u_min + (extent.u_max - extent.u_min) * static_cast<double>(i) / static_cast<double>(resolution - 1);
}

double PlaneGrid::v(std::size_t j) const {
    return extent.v_min + (extent.v_max - extent.v_min) * static_cast<double>(j) / static_cast<double>(resolution - 1);
}

PlaneSpec make_plane(std::span<const double> x1, std::span<const double> x2, std::span<const double> x3,
                     Triplet indices) {
    require(x1.size() == x2.size() && x1.size() == x3.size() && !x1.empty(), "plane points differ in dimension");
    const std::size_t d = x1.size();
    PlaneSpec s;
    s.anchor_indices = indices;
    s.origin.assign(x1.begin(), x1.end());
    s.basis_u.resize(d);
    s.basis_v.resize(d);
    std::vector<double> w(d);
    for (std::size_t k = 0; k < d; ++k) {
        s.basis_u[k] = x2[k] - x1[k];
        w[k] = x3[k] - x1[k];
    }
    const double len_u = norm(s.basis_u);
    const double len_w = norm(w);
    if (len_u == 0.0) {
        collinear(indices);
    }
    for (double& x : s.basis_u) {
        x /= len_u;
    }
    // Classical Gram-Schmidt applied twice keeps u.v at rounding level in high dimensions.
    s.basis_v = w;
    for (int pass = 0; pass < 2; ++pass) {
        const double c = dot(s.basis_v, s.basis_u);
        for (std::size_t k = 0; k < d; ++k) {
            s.basis_v[k] -= c * s.basis_u[k];
        }
    }
    const double len_v = norm(s.basis_v);
    if (len_v <= 1e-8 * len_w) {
        collinear(indices);
    }
    for (double& x : s.basis_v) {
        x /= len_v;
    }
    s.anchor_coords[0] = {0.0, 0.0};
    s.anchor_coords[1] = {len_u, 0.0};
    s.anchor_coords[2] = {dot(w, s.basis_u), dot(w, s.basis_v)};
    return s;
}

PlaneGrid sample_grid(const PlaneSpec& spec, std::size_t resolution, double margin, std::optional<PixelRange> clamp) {
    require(resolution >= 2, "grid resolution must be >= 2");
    require(margin >= 0.0, "grid margin must be >= 0");
    require(spec.dim() > 0, "plane spec is empty");
    double u_lo = spec.anchor_coords[0][0], u_hi = u_lo, v_lo = spec.anchor_coords[0][1], v_hi = v_lo;
    for (const auto& a : spec.anchor_coords) {
        u_lo = std::min(u_lo, a[0]);
        u_hi = std::max(u_hi, a[0]);
        v_lo = std::min(v_lo, a[1]);
        v_hi = std::max(v_hi, a[1]);
    }
    const double w = u_hi - u_lo;
    const double h = v_hi - v_lo;
    require(w > 0.0 && h > 0.0, "plane anchors span a zero-area box");

    PlaneGrid g;
    g.spec = spec;
    g.resolution = resolution;
    g.extent = {u_lo - margin * w, u_hi + margin * w, v_lo - margin * h, v_hi + margin * h};
    const std::size_t d = spec.dim();
    g.points = Matrix(resolution * resolution, d);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double a = g.u(i);
        for (std::size_t j = 0; j < resolution; ++j) {
            const double b = g.v(j);
            auto row = g.points.row(i * resolution + j);
            for (std::size_t k = 0; k < d; ++k) {
                double x = spec.origin[k] + a * spec.basis_u[k] + b * spec.basis_v[k];
                if (clamp) {
                    x = std::clamp(x, clamp->lo, clamp->hi);
                }
                row[k] = x;
            }
        }
    }
    return g;
}

TripletSet sample_triplets(const Matrix& data, std::size_t n_q, std::uint64_t seed) {
    const std::size_t n = data.rows;
    require(n >= 3, "triplet sampling needs at least 3 examples");
    TripletSet set{seed, {}};
    set.triplets.reserve(n_q);
    SplitMix64 rng(seed);
    std::size_t rejections = 0;
    while (set.triplets.size() < n_q) {
        Triplet t{};
        t[0] = static_cast<std::size_t>(rng.below(n));
        do {
            t[1] = static_cast<std::size_t>(rng.below(n));
        } while (t[1] == t[0]);
        do {
            t[2] = static_cast<std::size_t>(rng.below(n));
        } while (t[2] == t[0] || t[2] == t[1]);
        try {
            (void)make_plane(data.row(t[0]), data.row(t[1]), data.row(t[2]), t);
            set.triplets.push_back(t);
        } catch (const Error&) {
            if (++rejections > 10 * n_q) {
                fail(ErrorKind::numeric, "triplet sampling rejected more than " + std::to_string(10 * n_q) +
                                             " collinear triplets");
            }
        }
    }
    return set;
}

void write_triplets_csv(const TripletSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "seed," << set.seed << "\n";
    for (const auto& t : set.triplets) {
        out << t[0] << "," << t[1] << "," << t[2] << "\n";
    }
    if (!out) {
        fail(ErrorKind::io, "cannot write " + path.string());
    }
}

TripletSet read_triplets_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::missing_input, "cannot open triplet file " + path.string());
    }
    TripletSet set;
    std::string line;
    if (!std::getline(in, line) || line.rfind("seed,", 0) != 0) {
        fail(ErrorKind::config, path.string() + ": first line must be 'seed,<value>'");
    }
    try {
        set.seed = std::stoull(line.substr(5));
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            Triplet t{};
            char c1 = 0, c2 = 0;
            if (!(ss >> t[0] >> c1 >> t[1] >> c2 >> t[2]) || c1 != ',' || c2 != ',') {
                throw std::invalid_argument(line);
            }
            set.triplets.push_back(t);
        }
    } catch (const std::exception& e) {
        fail(ErrorKind::config, path.string() + ": malformed triplet row " + e.what());
    }
    return set;
}

}  // namespace repdyn
