#include <doctest.h>

#include "repdyn/error.hpp"
#include "repdyn/nn_math.hpp"
#include "repdyn/probe.hpp"
#include "test_support.hpp"

using namespace repdyn;
using testing::random_matrix;

namespace {

std::vector<std::uint32_t> random_labels(std::size_t n, std::uint32_t c, SplitMix64& rng) {
    std::vector<std::uint32_t> y(n);
    for (auto& v : y) v = static_cast<std::uint32_t>(rng.below(c));
    return y;
}

// Two Gaussian-free blobs at +-(1 + margin/2) along the first axis, so the classes are
// separated by a gap of width `margin` around the hyperplane through the origin.
void separable_blobs(std::size_t n, double margin, SplitMix64& rng, Matrix& x, std::vector<std::uint32_t>& y) {
    x = Matrix(n, 2);
    y.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t c = static_cast<std::uint32_t>(i % 2);
        const double center = (c == 0 ? -1.0 : 1.0) * (margin / 2 + 0.5);
        x(i, 0) = center + rng.uniform(-0.5, 0.5);
        x(i, 1) = rng.uniform(-0.4, 0.4);
        y[i] = c;
    }
}

}  // namespace

TEST_CASE("probe gradient matches central finite differences") {
    SplitMix64 rng(21);
    const double h = 1e-5;
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint32_t c = 2 + static_cast<std::uint32_t>(rng.below(5));
        const std::size_t p = 1 + rng.below(8);
        const std::size_t n = 1 + rng.below(16);
        Matrix w = random_matrix(c, p, rng, 0.5);
        const Matrix x = random_matrix(n, p, rng);
        const auto y = random_labels(n, c, rng);
        const auto analytic = probe_loss_grad(w, x, y);
        double diff = 0, scale = 0;
        for (std::size_t k = 0; k < w.data.size(); ++k) {
            const double orig = w.data[k];
            w.data[k] = orig + h;
            const double up = probe_loss_grad(w, x, y).loss;
            w.data[k] = orig - h;
            const double down = probe_loss_grad(w, x, y).loss;
            w.data[k] = orig;
            const double numeric = (up - down) / (2 * h);
            diff += (numeric - analytic.grad.data[k]) * (numeric - analytic.grad.data[k]);
            scale += analytic.grad.data[k] * analytic.grad.data[k];
        }
        CHECK(std::sqrt(diff) <= 1e-5 * std::max(std::sqrt(scale), 1e-8));
    }
}

TEST_CASE("probe separates margin-1 blobs with the default recipe, deterministically") {
    SplitMix64 rng(22);
    Matrix x;
    std::vector<std::uint32_t> y;
    separable_blobs(200, 1.0, rng, x, y);
    ProbeTrainConfig cfg;
    cfg.shuffle_seed = 5;
    const auto a = train_probe(x, y, 2, cfg);
    const auto b = train_probe(x, y, 2, cfg);
    CHECK(a.weights == b.weights);
    const auto pred = probe_predict(a, x);
    CHECK(pred == y);
}

TEST_CASE("prediction is the softmax argmax with lowest-index ties") {
    LinearProbe probe;
    probe.weights = Matrix(3, 2);
    // class scores for x = (1, 0): 1, 1, 0  -> tie between 0 and 1
    probe.weights(0, 0) = 1;
    probe.weights(1, 0) = 1;
    Matrix x(1, 2);
    x(0, 0) = 1;
    CHECK(probe_predict(probe, x) == std::vector<std::uint32_t>{0});

    SplitMix64 rng(23);
    probe.weights = random_matrix(6, 4, rng);
    const Matrix xs = random_matrix(50, 4, rng);
    const auto pred = probe_predict(probe, xs);
    for (std::size_t i = 0; i < xs.rows; ++i) {
        std::vector<double> s(6), prob(6);
        for (std::size_t c = 0; c < 6; ++c)
            for (std::size_t k = 0; k < 4; ++k) s[c] += probe.weights(c, k) * xs(i, k);
        softmax_cross_entropy(s, 0, prob);
        std::size_t best = 0;
        for (std::size_t c = 1; c < 6; ++c)
            if (prob[c] > prob[best]) best = c;
        CHECK(pred[i] == best);
    }
}

TEST_CASE("relabeling classes permutes the probe rows") {
    SplitMix64 rng(24);
    const Matrix x = random_matrix(60, 3, rng);
    const auto y = random_labels(60, 3, rng);
    const std::uint32_t perm[3] = {2, 0, 1};
    std::vector<std::uint32_t> y2(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = perm[y[i]];
    ProbeTrainConfig cfg;
    cfg.learning_rate = 1e-2;
    const auto a = train_probe(x, y, 3, cfg);
    const auto b = train_probe(x, y2, 3, cfg);
    for (std::uint32_t c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < 3; ++k) CHECK(b.weights(perm[c], k) == doctest::Approx(a.weights(c, k)).epsilon(1e-12));
}

TEST_CASE("probe save/load round trip and input validation") {
    SplitMix64 rng(25);
    const Matrix x = random_matrix(30, 4, rng);
    const auto y = random_labels(30, 3, rng);
    ProbeTrainConfig cfg;
    cfg.shuffle_seed = 9;
    const auto p = train_probe(x, y, 3, cfg, "conv1", 15);
    testing::TempDir dir("probe");
    save_probe(dir / "15.rdt", p, cfg);
    const auto q = load_probe(dir / "15.rdt");
    CHECK(q.weights == p.weights);
    CHECK(q.layer_name == "conv1");
    CHECK(q.source_epoch == 15);
    CHECK(q.train_seed == 9);

    const std::vector<std::uint32_t> one_class(30, 1);
    CHECK_THROWS_AS(train_probe(x, one_class, 3, cfg), Error);
    CHECK_THROWS_AS(train_probe(x, std::vector<std::uint32_t>(29, 0), 3, cfg), Error);
}

TEST_CASE("loss at zero weights is ln C and saturates for a dominant correct class") {
    SplitMix64 rng(26);
    const Matrix x = random_matrix(7, 4, rng);
    const auto y = random_labels(7, 5, rng);
    CHECK(probe_loss_grad(Matrix(5, 4), x, y).loss == doctest::Approx(std::log(5.0)).epsilon(1e-15));

    Matrix w(3, 1);
    w(1, 0) = 50;
    Matrix one(1, 1, 1.0);
    CHECK(probe_loss_grad(w, one, std::vector<std::uint32_t>{1}).loss < 1e-9);
    CHECK_THROWS_AS(probe_loss_grad(w, one, std::vector<std::uint32_t>{3}), Error);
}

TEST_CASE("8x5 three-class gradient within 1e-6 absolute of finite differences") {
    SplitMix64 rng(27);
    Matrix w = random_matrix(3, 5, rng);
    const Matrix x = random_matrix(8, 5, rng);
    const auto y = random_labels(8, 3, rng);
    const auto g = probe_loss_grad(w, x, y).grad;
    double worst = 0;
    for (std::size_t k = 0; k < w.data.size(); ++k) {
        const double o = w.data[k];
        w.data[k] = o + 1e-5;
        const double up = probe_loss_grad(w, x, y).loss;
        w.data[k] = o - 1e-5;
        const double down = probe_loss_grad(w, x, y).loss;
        w.data[k] = o;
        worst = std::max(worst, std::abs((up - down) / 2e-5 - g.data[k]));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("argmax details: dominant row, 1-vs-3 tie, positive scaling, dimension check") {
    LinearProbe probe;
    probe.weights = Matrix(4, 2);
    probe.weights(2, 0) = 3;
    Matrix x(1, 2);
    x(0, 0) = 1;
    CHECK(probe_predict(probe, x)[0] == 2);

    probe.weights = Matrix(4, 2, -1.0);
    probe.weights(1, 1) = 2;
    probe.weights(3, 1) = 2;
    Matrix xt(1, 2);
    xt(0, 1) = 1;
    CHECK(probe_predict(probe, xt)[0] == 1);

    SplitMix64 rng(28);
    probe.weights = random_matrix(5, 3, rng);
    const Matrix xs = random_matrix(40, 3, rng);
    LinearProbe scaled = probe;
    for (double& v : scaled.weights.data) v *= 3.7;
    CHECK(probe_predict(scaled, xs) == probe_predict(probe, xs));
    CHECK_THROWS_AS(probe_predict(probe, random_matrix(2, 4, rng)), Error);
}

TEST_CASE("training lowers the loss below ln C on separable data") {
    SplitMix64 rng(29);
    Matrix x;
    std::vector<std::uint32_t> y;
    separable_blobs(200, 1.0, rng, x, y);
    const auto p = train_probe(x, y, 2, ProbeTrainConfig{});
    CHECK(probe_loss_grad(p.weights, x, y).loss < std::log(2.0));
}
