// Acceptance suite: one PASS/FAIL line per criterion; exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "repdyn/checkpoint.hpp"
#include "repdyn/dataset.hpp"
#include "repdyn/cka.hpp"
#include "repdyn/diagram.hpp"
#include "repdyn/drs.hpp"
#include "repdyn/error.hpp"
#include "repdyn/optim.hpp"
#include "repdyn/plane.hpp"
#include "repdyn/probe.hpp"
#include "repdyn/trainer.hpp"

using namespace repdyn;
using testing::matmul;
using testing::random_matrix;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) detail.clear();
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------
Outcome criterion_cka_oracle() {
    Outcome o;
    const auto t0 = Clock::now();
    SplitMix64 rng(1001);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + rng.below(31);
        const auto f = make_representation(random_matrix(m, 1 + rng.below(16), rng));
        const auto g = make_representation(random_matrix(m, 1 + rng.below(16), rng));
        worst = std::max(worst, std::abs(cka(f, g) - oracle::cka(to_matrix(f.matrix), to_matrix(g.matrix))));
    }
    const double secs = seconds_since(t0);
    o.require(worst <= 1e-10, "max deviation " + fmt("%.3e", worst));
    o.require(secs < 5.0, "runtime " + fmt("%.2f", secs) + " s");
    if (o.pass) o.detail = "max |engine - oracle| = " + fmt("%.2e", worst) + " over 200 pairs, " + fmt("%.2f", secs) + " s";
    return o;
}

Outcome criterion_cka_invariance() {
    Outcome o;
    const auto t0 = Clock::now();
    SplitMix64 rng(1002);
    double self = 0, orth = 0, scale = 0, perm = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 4 + rng.below(29);
        const std::size_t p = 1 + rng.below(16);
        const Matrix f = random_matrix(m, p, rng);
        const Matrix g = random_matrix(m, 1 + rng.below(16), rng);
        const double base = cka(f, g);
        self = std::max(self, std::abs(cka(f, f) - 1.0));
        orth = std::max(orth, std::abs(cka(matmul(f, testing::random_orthogonal(p, rng)), g) - base));
        Matrix s = f;
        const double c = std::exp(rng.uniform(-5, 5));
        for (double& v : s.data) v *= c;
        scale = std::max(scale, std::abs(cka(s, g) - base));
        std::vector<std::size_t> idx(p);
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(std::span<std::size_t>(idx));
        Matrix pm(m, p);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < p; ++k) pm(i, k) = f(i, idx[k]);
        perm = std::max(perm, std::abs(cka(pm, g) - base));
    }
    const double secs = seconds_since(t0);
    o.require(self <= 1e-9, "self " + fmt("%.2e", self));
    o.require(orth <= 1e-6, "orthogonal " + fmt("%.2e", orth));
    o.require(scale <= 1e-12, "scaling " + fmt("%.2e", scale));
    o.require(perm <= 1e-12, "permutation " + fmt("%.2e", perm));
    o.require(secs < 10.0, "runtime " + fmt("%.2f", secs) + " s");
    if (o.pass) {
        o.detail = "self " + fmt("%.1e", self) + ", orth " + fmt("%.1e", orth) + ", scale " + fmt("%.1e", scale) +
                   ", perm " + fmt("%.1e", perm) + ", " + fmt("%.2f", secs) + " s";
    }
    return o;
}

Outcome criterion_probe_gradient() {
    Outcome o;
    SplitMix64 rng(1003);
    const double h = 1e-5;
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint32_t c = 2 + static_cast<std::uint32_t>(rng.below(5));
        const std::size_t p = 1 + rng.below(8);
        const std::size_t n = 1 + rng.below(16);
        Matrix w = random_matrix(c, p, rng, 0.5);
        const Matrix x = random_matrix(n, p, rng);
        std::vector<std::uint32_t> y(n);
        for (auto& v : y) v = static_cast<std::uint32_t>(rng.below(c));
        const Matrix g = probe_loss_grad(w, x, y).grad;
        double diff = 0, norm = 0;
        for (std::size_t k = 0; k < w.data.size(); ++k) {
            const double orig = w.data[k];
            w.data[k] = orig + h;
            const double up = probe_loss_grad(w, x, y).loss;
            w.data[k] = orig - h;
            const double down = probe_loss_grad(w, x, y).loss;
            w.data[k] = orig;
            const double num = (up - down) / (2 * h);
            diff += (num - g.data[k]) * (num - g.data[k]);
            norm += g.data[k] * g.data[k];
        }
        worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12));
    }
    o.require(worst <= 1e-5, "relative error " + fmt("%.2e", worst));
    if (o.pass) o.detail = "max relative error " + fmt("%.2e", worst) + " over 50 instances";
    return o;
}

// Two compact blobs centered at (-1, 0) and (1, 0): x0 half-width 0.5 leaves a gap of exactly 1.
void blobs(SplitMix64& rng, Matrix& x, std::vector<std::uint32_t>& y) {
    x = Matrix(200, 2);
    y.assign(200, 0);
    for (std::size_t i = 0; i < 200; ++i) {
        y[i] = static_cast<std::uint32_t>(i % 2);
        const double center = y[i] == 0 ? -1.0 : 1.0;
        x(i, 0) = center + rng.uniform(-0.5, 0.5);
        x(i, 1) = rng.uniform(-0.4, 0.4);
    }
}

Outcome criterion_probe_separable() {
    Outcome o;
    std::size_t worst = 200;
    bool same = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SplitMix64 rng(1004 + seed);
        Matrix x;
        std::vector<std::uint32_t> y;
        blobs(rng, x, y);
        ProbeTrainConfig cfg;  // Adam 1e-4, 10 epochs, batch 128
        cfg.shuffle_seed = seed;
        const LinearProbe a = train_probe(x, y, 2, cfg);
        const LinearProbe b = train_probe(x, y, 2, cfg);
        const auto pred = probe_predict(a, x);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < 200; ++i) correct += pred[i] == y[i];
        worst = std::min(worst, correct);
        same &= a.weights.data.size() == b.weights.data.size() &&
                std::memcmp(a.weights.data.data(), b.weights.data.data(), a.weights.data.size() * sizeof(double)) == 0;
    }
    o.require(worst == 200, "worst train accuracy " + std::to_string(worst) + "/200");
    o.require(same, "weights differ between runs");
    if (o.pass) o.detail = "train accuracy 200/200 on 20 blob draws, weights bitwise equal across repeated runs";
    return o;
}

Outcome criterion_drs_exact() {
    Outcome o;
    SplitMix64 rng(1005);
    bool exact = true, self = true, sym = true;
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint32_t c = 2 + static_cast<std::uint32_t>(rng.below(9));
        const auto a = oracle::random_label_grid(rng, 50, c);
        std::vector<std::uint32_t> bv(a.labels.u32().begin(), a.labels.u32().end());
        const double p = rng.uniform();
        for (auto& v : bv)
            if (rng.uniform() < p) v = static_cast<std::uint32_t>(rng.below(c));
        const auto b = make_label_grid(0, 50, bv);
        const std::vector<LabelGrid> ga{a}, gb{b};
        exact &= drs(ga, gb) == static_cast<double>(oracle::agreement_count(a, b)) / 2500.0;
        self &= drs(ga, ga) == 1.0;
        sym &= drs(ga, gb) == drs(gb, ga);
    }
    o.require(exact, "DRS differs from brute force");
    o.require(self, "DRS(A,A) != 1");
    o.require(sym, "DRS not symmetric");
    if (o.pass) o.detail = "100 pairs exact, DRS(A,A) = 1, symmetric";
    return o;
}

Outcome criterion_fragmentation() {
    Outcome o;
    SplitMix64 rng(1006);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint32_t c = 2 + static_cast<std::uint32_t>(rng.below(9));
        const std::size_t block = 1 + rng.below(8);
        std::vector<std::uint32_t> v(2500);
        for (std::size_t i = 0; i < 50; ++i)
            for (std::size_t j = 0; j < 50; ++j) {
                const auto h = static_cast<std::uint32_t>(((i / block) * 131 + (j / block) * 71 + trial) % 7);
                v[i * 50 + j] = rng.uniform() < 0.1 ? static_cast<std::uint32_t>(rng.below(c)) : h % c;
            }
        const auto g = make_label_grid(0, 50, v);
        mismatches += fragment_count(g) != oracle::flood_fill_components(g);
    }
    std::vector<std::uint32_t> checker(2500);
    for (std::size_t k = 0; k < 2500; ++k) checker[k] = static_cast<std::uint32_t>((k / 50 + k % 50) % 2);
    const std::size_t cb = fragment_count(make_label_grid(0, 50, checker));
    const std::size_t constant = fragment_count(make_label_grid(0, 50, std::vector<std::uint32_t>(2500, 3)));
    o.require(mismatches == 0, std::to_string(mismatches) + " grids disagree with flood fill");
    o.require(cb == 2500, "checkerboard gives " + std::to_string(cb));
    o.require(constant == 1, "constant gives " + std::to_string(constant));
    if (o.pass) o.detail = "1000 grids match flood fill, checkerboard 2500, constant 1";
    return o;
}

Outcome criterion_plane_geometry() {
    Outcome o;
    SplitMix64 rng(1007);
    double ortho = 0, recon = 0;
    bool inside = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const Matrix x = random_matrix(3, 128, rng);
        const PlaneSpec s = make_plane(x.row(0), x.row(1), x.row(2));
        double uu = 0, vv = 0, uv = 0;
        for (std::size_t k = 0; k < 128; ++k) {
            uu += s.basis_u[k] * s.basis_u[k];
            vv += s.basis_v[k] * s.basis_v[k];
            uv += s.basis_u[k] * s.basis_v[k];
        }
        ortho = std::max({ortho, std::abs(uu - 1), std::abs(vv - 1), std::abs(uv)});
        const PlaneGrid g = sample_grid(s, 2);
        for (int a = 0; a < 3; ++a) {
            const auto [cu, cv] = s.anchor_coords[a];
            for (std::size_t k = 0; k < 128; ++k)
                recon = std::max(recon, std::abs(s.origin[k] + cu * s.basis_u[k] + cv * s.basis_v[k] - x(a, k)));
            inside &= cu >= g.extent.u_min && cu <= g.extent.u_max && cv >= g.extent.v_min && cv <= g.extent.v_max;
        }
    }
    bool rejected = true;
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix base = random_matrix(2, 128, rng);
        std::vector<double> third(128);
        const double t = rng.uniform(-3, 3);
        for (std::size_t k = 0; k < 128; ++k) third[k] = base(0, k) + t * (base(1, k) - base(0, k));
        try {
            (void)make_plane(base.row(0), base.row(1), third);
            rejected = false;
        } catch (const Error&) {
        }
    }
    o.require(ortho <= 1e-9, "orthonormality " + fmt("%.2e", ortho));
    o.require(recon <= 1e-5, "reconstruction " + fmt("%.2e", recon));
    o.require(inside, "an anchor lies outside the extent");
    o.require(rejected, "a collinear triplet was accepted");
    if (o.pass) {
        o.detail = "orthonormal to " + fmt("%.1e", ortho) + ", reconstruction " + fmt("%.1e", recon) +
                   ", anchors inside, 100 collinear triplets rejected";
    }
    return o;
}

Outcome criterion_optimizer_traces() {
    Outcome o;
    OptimizerConfig adam;
    AdamState st;
    std::vector<double> theta{0.0};
    const std::vector<double> g{0.5};
    adam_step(theta, g, st, adam);
    const double s1 = 1e-3 * 0.5 / (0.5 + 1e-8);
    const double e1 = std::abs(theta[0] + s1);
    adam_step(theta, g, st, adam);
    const double m2 = 0.9 * 0.05 + 0.1 * 0.5, v2 = 0.999 * 0.00025 + 0.001 * 0.25;
    const double s2 = 1e-3 * (m2 / 0.19) / (std::sqrt(v2 / 0.001999) + 1e-8);
    const double e2 = std::abs(theta[0] + s1 + s2);
    o.require(e1 <= 1e-12 && e2 <= 1e-12, "Adam trace deviates by " + fmt("%.2e", std::max(e1, e2)));

    OptimizerConfig hb;
    hb.kind = OptimizerKind::sgd;
    hb.learning_rate = 1.0;
    hb.momentum = 0.9;
    SgdState sg;
    std::vector<double> w{0.0};
    sgd_step(w, std::vector<double>{1.0}, sg, hb);
    const double w1 = w[0];
    sgd_step(w, std::vector<double>{1.0}, sg, hb);
    o.require(w1 == -1.0 && w[0] == -2.9, "heavy-ball trace " + fmt("%.17g", w1) + ", " + fmt("%.17g", w[0]));

    // eps = 0.01 with |g| <= 1e-4: first-step m_hat = g, so |step| <= lr |g| / eps and the step
    // stays proportional to g (ratio to lr g / eps in [1 / (1 + |g| / eps), 1]).
    SplitMix64 rng(1008);
    std::vector<double> grads(500), p(500, 0.0);
    for (auto& x : grads) x = (rng.uniform() < 0.5 ? -1 : 1) * std::exp(rng.uniform(std::log(1e-8), std::log(1e-4)));
    OptimizerConfig big;
    big.epsilon = 0.01;
    AdamState sb;
    adam_step(p, grads, sb, big);
    bool bound = true;
    double spread_lo = 1e300, spread_hi = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double plain = big.learning_rate * grads[i] / big.epsilon;
        const double ratio = -p[i] / plain;
        bound &= std::abs(p[i]) <= std::abs(plain);
        bound &= ratio >= (1.0 - 1e-12) / (1.0 + std::abs(grads[i]) / big.epsilon);
        spread_lo = std::min(spread_lo, std::abs(p[i]));
        spread_hi = std::max(spread_hi, std::abs(p[i]));
    }
    o.require(bound, "large-epsilon bound violated");
    if (o.pass) {
        o.detail = "Adam trace within " + fmt("%.1e", std::max(e1, e2)) +
                   ", heavy-ball -1, -2.9 exact, eps=0.01 steps span " + fmt("%.1e", spread_lo) + ".." +
                   fmt("%.1e", spread_hi) + " (proportional to |g|)";
    }
    return o;
}

Outcome criterion_epoch_grid() {
    Outcome o;
    const auto enumerated = oracle::enumerate_grid(4000);
    const EpochGrid g = dense_epoch_grid(4000);
    o.require(g.size() == enumerated.size(), "closed form " + std::to_string(g.size()) + " vs enumeration " +
                                                 std::to_string(enumerated.size()));
    o.require(std::equal(g.begin(), g.end(), enumerated.begin(), enumerated.end()), "membership differs");
    o.require(g.contains(299) && !g.contains(301) && g.contains(303) && g.contains(905) && !g.contains(904),
              "spot membership checks failed");
    if (o.pass) o.detail = std::to_string(g.size()) + " epochs by both enumeration and closed form; spot checks hold";
    return o;
}

// ---------------------------------------------------------------------------
// Desk-scale end-to-end pipeline.

constexpr std::size_t kDeskPlanes = 16;

TrainRunConfig desk_config(double lr) {
    TrainRunConfig c;
    c.run_id = lr == 0.0 ? "desk-frozen" : "desk";
    c.model = ModelKind::conv2;
    c.width_k = 8;
    c.dataset.n_train = 1000;
    c.dataset.n_test = 500;
    c.optimizer.kind = OptimizerKind::adam;
    c.optimizer.learning_rate = lr;
    c.total_epochs = 200;
    c.epoch_grid = uniform_epoch_grid(200, 5);
    return c;
}

struct DeskRun {
    TrainResult result;
    std::map<std::string, SimilarityDiagram> cka;  // by layer
    std::map<std::string, SimilarityDiagram> drs;  // by layer, plus "output"
};

// Trains, then writes every analysis artifact into the store: CKA and DRS CSVs and heatmaps,
// probes, triplets, label maps, fragmentation CSVs and a few plane images.
DeskRun run_desk(const TrainRunConfig& cfg, const fs::path& root, unsigned jobs) {
    DeskRun run;
    const CheckpointStore store = train_run(cfg, root, &run.result);
    const CheckpointStore reopened = open_checkpoint_store(root);
    const auto plan = make_batch_plan(reopened.labels(), 5);

    RenderSpec spec;
    if (run.result.phase3_epoch) {
        const auto& g = store.epoch_grid();
        const auto it = std::lower_bound(g.begin(), g.end(), *run.result.phase3_epoch);
        if (it != g.end()) spec.annotations.push_back({*it, kCyan});
    }

    const Dataset ds = load_dataset(cfg.dataset);
    const TripletSet triplets = sample_triplets(ds.train_x, kDeskPlanes, 2024);
    write_triplets_csv(triplets, root / "triplets.csv");
    const PlaneOptions popt;

    std::vector<std::string> drs_layers = store.layer_names();
    drs_layers.push_back("output");
    for (const auto& layer : drs_layers) {
        std::vector<LinearProbe> probes;
        if (layer != "output") {
            auto d = cka_diagram(store, store, layer, plan, jobs);
            write_diagram_csv(d, root / diagram_filename(Metric::cka, layer));
            render_heatmap(d, spec, root / ("cka_" + layer + ".ppm"));
            run.cka[layer] = std::move(d);

            ProbeTrainConfig pcfg;
            pcfg.shuffle_seed = 11;
            probes = train_store_probes(store, layer, pcfg, jobs);
            save_store_probes(store, probes, pcfg);
        }
        const LabelMapCache maps = compute_label_maps(store, layer, probes, triplets, popt, jobs);
        save_label_maps(root / "labelmaps" / layer, store.epoch_grid(), maps);
        auto d = drs_diagram(store.epoch_grid(), maps, layer, store.run_id(), jobs);
        write_diagram_csv(d, root / diagram_filename(Metric::drs, layer));
        render_heatmap(d, spec, root / ("drs_" + layer + ".ppm"));
        run.drs[layer] = std::move(d);

        std::vector<FragmentationRow> rows;
        for (std::size_t e = 0; e < maps.size(); ++e) rows.push_back({store.epoch_grid()[e], fragmentation_score(maps[e])});
        write_fragmentation_csv(rows, root / ("frag_" + layer + ".csv"));
        render_plane(maps.front()[0], 0, root / ("plane_" + layer + "_first.ppm"));
        render_plane(maps.back()[0], 0, root / ("plane_" + layer + "_last.ppm"));
    }
    return run;
}

bool symmetric_unit_diagonal(const SimilarityDiagram& d, double diag_tol) {
    const std::size_t n = d.values.rows;
    if (n != d.values.cols) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(d.values(i, i) - 1.0) > diag_tol) return false;
        for (std::size_t j = 0; j < n; ++j)
            if (d.values(i, j) != d.values(j, i)) return false;
    }
    return true;
}

bool all_ones(const SimilarityDiagram& d) {
    return std::all_of(d.values.data.begin(), d.values.data.end(), [](double v) { return v == 1.0; });
}

bool phase3_consistent(const ErrorCurves& c, const std::optional<std::uint32_t>& detected) {
    const auto it = std::find_if(c.train_error.begin(), c.train_error.end(), [](double e) { return e < 0.001; });
    if (it == c.train_error.end()) return !detected.has_value();
    return detected && *detected == static_cast<std::uint32_t>(it - c.train_error.begin());
}

struct DeskContext {
    testing::TempDir dir{"accept"};
    fs::path first;
    double first_seconds = 0;
};

Outcome criterion_desk_run(DeskContext& ctx) {
    Outcome o;
    ctx.first = ctx.dir / "desk";
    const auto t0 = Clock::now();
    DeskRun run;
    try {
        run = run_desk(desk_config(1e-3), ctx.first, 0);
    } catch (const std::exception& e) {
        o.require(false, std::string("pipeline failed: ") + e.what());
        return o;
    }
    ctx.first_seconds = seconds_since(t0);

    try {
        const auto store = open_checkpoint_store(ctx.first);
        o.require(store.epoch_grid().size() == 41, "grid has " + std::to_string(store.epoch_grid().size()) + " epochs");
    } catch (const std::exception& e) {
        o.require(false, std::string("store does not validate: ") + e.what());
    }
    for (const auto& [layer, d] : run.cka) o.require(symmetric_unit_diagonal(d, 1e-12), "CKA " + layer + " not symmetric/unit");
    for (const auto& [layer, d] : run.drs) o.require(symmetric_unit_diagonal(d, 0.0), "DRS " + layer + " not symmetric/unit");
    o.require(phase3_consistent(run.result.curves, run.result.phase3_epoch), "detect_phase3 disagrees with the curve");

    const auto t1 = Clock::now();
    DeskRun frozen;
    try {
        frozen = run_desk(desk_config(0.0), ctx.dir / "frozen", 0);
    } catch (const std::exception& e) {
        o.require(false, std::string("frozen pipeline failed: ") + e.what());
        return o;
    }
    const double frozen_seconds = seconds_since(t1);
    for (const auto& [layer, d] : frozen.cka) o.require(all_ones(d), "frozen CKA " + layer + " not all ones");
    for (const auto& [layer, d] : frozen.drs) o.require(all_ones(d), "frozen DRS " + layer + " not all ones");
    o.require(phase3_consistent(frozen.result.curves, frozen.result.phase3_epoch),
              "detect_phase3 disagrees with the frozen curve");
    o.require(ctx.first_seconds < 300.0, "runtime " + fmt("%.1f", ctx.first_seconds) + " s");

    if (o.pass) {
        const auto& c = run.result.curves;
        o.detail = "41-epoch store validates; final train/test error " + format_value(c.train_error.back()) + "/" +
                   format_value(c.test_error.back()) + "; phase III " +
                   (run.result.phase3_epoch ? "at epoch " + std::to_string(*run.result.phase3_epoch) : "not reached") +
                   "; CKA conv1[0][200] " + format_value(run.cka["conv1"].values(0, 40)) + ", DRS output[0][200] " +
                   format_value(run.drs["output"].values(0, 40)) + "; frozen diagrams all ones; " +
                   fmt("%.1f", ctx.first_seconds) + " s (+" + fmt("%.1f", frozen_seconds) + " s frozen), " +
                   std::to_string(kDeskPlanes) + " planes";
    }
    return o;
}

Outcome criterion_determinism(DeskContext& ctx) {
    Outcome o;
    if (ctx.first.empty() || !fs::exists(ctx.first / "run.json")) {
        o.require(false, "first desk run missing");
        return o;
    }
    const fs::path second = ctx.dir / "desk_again";
    try {
        run_desk(desk_config(1e-3), second, 3);  // different thread count on purpose
    } catch (const std::exception& e) {
        o.require(false, std::string("second run failed: ") + e.what());
        return o;
    }
    std::size_t files = 0, differing = 0;
    std::string first_diff;
    for (const auto& e : fs::recursive_directory_iterator(ctx.first)) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(e.path(), ctx.first);
        if (!fs::exists(second / rel) || testing::slurp(e.path()) != testing::slurp(second / rel)) {
            ++differing;
            if (first_diff.empty()) first_diff = rel.string();
        }
    }
    std::size_t files2 = 0;
    for (const auto& e : fs::recursive_directory_iterator(second)) files2 += e.is_regular_file();
    o.require(differing == 0, std::to_string(differing) + " files differ (first: " + first_diff + ")");
    o.require(files == files2, "file counts differ: " + std::to_string(files) + " vs " + std::to_string(files2));
    if (o.pass) o.detail = std::to_string(files) + " files byte-identical (checkpoints, CSVs, PPMs), jobs=auto vs jobs=3";
    return o;
}

}  // namespace

int main() {
    DeskContext ctx;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"CKA oracle equivalence", criterion_cka_oracle},
        {"CKA invariance suite", criterion_cka_invariance},
        {"Probe gradient check", criterion_probe_gradient},
        {"Probe separable convergence", criterion_probe_separable},
        {"DRS exactness", criterion_drs_exact},
        {"Fragmentation oracle", criterion_fragmentation},
        {"Plane geometry", criterion_plane_geometry},
        {"Optimizer traces", criterion_optimizer_traces},
        {"Epoch grid", criterion_epoch_grid},
        {"End-to-end desk run", [&] { return criterion_desk_run(ctx); }},
        {"Determinism", [&] { return criterion_determinism(ctx); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::printf("%s  %2zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
