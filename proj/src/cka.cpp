#include "repdyn/cka.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "repdyn/error.hpp"
#include "repdyn/parallel.hpp"

namespace repdyn {

namespace fs = std::filesystem;

namespace {

double frobenius_sq(const Matrix& k) {
    double s = 0.0;
    for (double v : k.data) {
        s += v * v;
    }
    return s;
}

Matrix select_rows(const RepresentationMatrix& r, std::span<const std::size_t> rows) {
    const std::size_t p = r.neurons();
    const auto src = r.matrix.f32();
    Matrix out(rows.size(), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < r.examples(), "batch index out of range");
        for (std::size_t k = 0; k < p; ++k) {
            out(i, k) = src[rows[i] * p + k];
        }
    }
    return out;
}

// Centered Gram of one batch plus its self-HSIC, reused across all pairs of a diagram.
struct CenteredGram {
    Matrix kc;
    double self = 0.0;
};

CenteredGram centered_gram_of(const Matrix& f, HsicDenominator denom, const std::string& what) {
    const Matrix k = gram(f);
    CenteredGram out{center(k), 0.0};
    out.self = hsic0(out.kc, out.kc, denom).value;
    // Relative test: centering a constant Gram leaves only rounding noise.
    const double scale = frobenius_sq(k);
    if (out.self <= 0.0 || frobenius_sq(out.kc) <= 1e-24 * scale) {
        fail(ErrorKind::numeric, "zero-variance representation" + what + ": CKA undefined");
    }
    return out;
}

CenteredGram centered_gram(const RepresentationMatrix& r, std::span<const std::size_t> batch,
                           HsicDenominator denom) {
    return centered_gram_of(select_rows(r, batch), denom,
                            " (layer '" + r.layer_name + "', epoch " + std::to_string(r.epoch) + ")");
}

double cka_from_centered(const CenteredGram& a, const CenteredGram& b, HsicDenominator denom) {
    return hsic0(a.kc, b.kc, denom).value / std::sqrt(a.self * b.self);
}

}  // namespace

CkaBatchPlan make_batch_plan(std::span<const std::uint32_t> labels, std::size_t batch_count, std::size_t batch_size) {
    const std::size_t m = labels.size();
    require(batch_count >= 1, "batch_count must be >= 1");
    if (batch_size == 0) {
        batch_size = m / batch_count;
    }
    require(batch_size >= 2, "each CKA batch needs at least 2 examples");
    require(batch_count * batch_size <= m, "batch plan needs " + std::to_string(batch_count * batch_size) +
                                               " examples but the probe set has " + std::to_string(m));
    std::map<std::uint32_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < m; ++i) {
        by_class[labels[i]].push_back(i);
    }
    std::vector<std::size_t> interleaved;
    interleaved.reserve(m);
    for (std::size_t round = 0; interleaved.size() < m; ++round) {
        for (const auto& [cls, idx] : by_class) {
            if (round < idx.size()) {
                interleaved.push_back(idx[round]);
            }
        }
    }
    CkaBatchPlan plan;
    plan.batches.resize(batch_count);
    for (std::size_t k = 0; k < batch_count * batch_size; ++k) {
        plan.batches[k % batch_count].push_back(interleaved[k]);
    }
    for (auto& b : plan.batches) {
        std::sort(b.begin(), b.end());
    }
    return plan;
}

CkaBatchPlan full_batch_plan(std::size_t m) {
    CkaBatchPlan plan;
    plan.batches.emplace_back(m);
    for (std::size_t i = 0; i < m; ++i) {
        plan.batches[0][i] = i;
    }
    return plan;
}

void validate(const CkaBatchPlan& plan, std::size_t m) {
    require(!plan.batches.empty(), "batch plan is empty");
    std::vector<bool> used(m, false);
    for (const auto& b : plan.batches) {
        require(b.size() >= 2, "each CKA batch needs at least 2 examples");
        for (std::size_t i : b) {
            require(i < m, "batch index " + std::to_string(i) + " out of range for m = " + std::to_string(m));
            require(!used[i], "batches are not disjoint (index " + std::to_string(i) + ")");
            used[i] = true;
        }
    }
}

Matrix gram(const Matrix& f) {
    const std::size_t m = f.rows;
    Matrix k(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto ri = f.row(i);
        for (std::size_t j = i; j < m; ++j) {
            const auto rj = f.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < f.cols; ++c) {
                s += ri[c] * rj[c];
            }
            k(i, j) = s;
            k(j, i) = s;
        }
    }
    return k;
}

Matrix gram(const RepresentationMatrix& f) {
    validate(f);
    return gram(to_matrix(f.matrix));
}

Matrix center(const Matrix& k) {
    require(k.rows == k.cols, "center: matrix must be square");
    require(k.rows >= 2, "center: need m >= 2");
    const std::size_t m = k.rows;
    std::vector<double> row_mean(m, 0.0), col_mean(m, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            row_mean[i] += k(i, j);
            col_mean[j] += k(i, j);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        grand += row_mean[i];
        row_mean[i] /= static_cast<double>(m);
        col_mean[i] /= static_cast<double>(m);
    }
    grand /= static_cast<double>(m * m);
    Matrix out(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out(i, j) = k(i, j) - row_mean[i] - col_mean[j] + grand;
        }
    }
    return out;
}

HsicValue hsic0(const Matrix& kc, const Matrix& lc, HsicDenominator denom) {
    require(kc.rows == kc.cols && lc.rows == lc.cols && kc.rows == lc.rows, "hsic0: dimension mismatch");
    require(kc.rows >= 2, "hsic0: need m >= 2");
    double dot = 0.0;
    for (std::size_t i = 0; i < kc.data.size(); ++i) {
        dot += kc.data[i] * lc.data[i];
    }
    const double n = static_cast<double>(kc.rows - 1);
    return {dot / (denom == HsicDenominator::m_minus_1 ? n : n * n)};
}

double cka(const RepresentationMatrix& f, const RepresentationMatrix& g, std::span<const std::size_t> batch,
           HsicDenominator denom) {
    validate(f);
    validate(g);
    require(f.examples() == g.examples(), "cka: representations cover different numbers of examples");
    require(batch.size() >= 2, "cka: batch needs at least 2 examples");
    const CenteredGram a = centered_gram(f, batch, denom);
    const CenteredGram b = centered_gram(g, batch, denom);
    return cka_from_centered(a, b, denom);
}

double cka(const RepresentationMatrix& f, const RepresentationMatrix& g) {
    const auto plan = full_batch_plan(f.examples());
    return cka(f, g, plan.batches[0]);
}

double cka(const Matrix& f, const Matrix& g, HsicDenominator denom) {
    require(f.rows == g.rows, "cka: representations cover different numbers of examples");
    require(f.rows >= 2, "cka: need at least 2 examples");
    const CenteredGram a = centered_gram_of(f, denom, "");
    const CenteredGram b = centered_gram_of(g, denom, "");
    return cka_from_centered(a, b, denom);
}

double batched_cka(const RepresentationMatrix& f, const RepresentationMatrix& g, const CkaBatchPlan& plan) {
    validate(plan, f.examples());
    double sum = 0.0;
    for (const auto& b : plan.batches) {
        sum += cka(f, g, b);
    }
    return sum / static_cast<double>(plan.batch_count());
}

SimilarityDiagram cka_diagram(const CheckpointStore& store_row, const CheckpointStore& store_col,
                              const std::string& layer, const CkaBatchPlan& plan, unsigned jobs) {
    for (const CheckpointStore* s : {&store_row, &store_col}) {
        if (!s->has_layer(layer)) {
            std::string names;
            for (const auto& l : s->layer_names()) {
                names += (names.empty() ? "" : ", ") + l;
            }
            fail(ErrorKind::missing_input, "layer '" + layer + "' not in store " + s->root().string() +
                                               " (available: " + names + ")");
        }
    }
    if (store_row.probe_examples() != store_col.probe_examples() || store_row.labels() != store_col.labels()) {
        fail(ErrorKind::missing_input, "stores were evaluated on different probe-example sets");
    }
    validate(plan, store_row.probe_examples());

    std::error_code ec;
    const bool same = fs::equivalent(store_row.root(), store_col.root(), ec);
    const auto& rows = store_row.epoch_grid();
    const auto& cols = store_col.epoch_grid();
    const std::size_t nb = plan.batch_count();
    constexpr auto denom = HsicDenominator::m_minus_1;

    auto load_grams = [&](const CheckpointStore& s) {
        const auto& grid = s.epoch_grid();
        std::vector<std::vector<CenteredGram>> out(grid.size(), std::vector<CenteredGram>(nb));
        parallel_for(grid.size(), jobs, [&](std::size_t e) {
            const RepresentationMatrix r = s.representation(grid[e], layer);
            for (std::size_t b = 0; b < nb; ++b) {
                out[e][b] = centered_gram(r, plan.batches[b], denom);
            }
        });
        return out;
    };
    const auto row_grams = load_grams(store_row);
    const auto col_grams_storage = same ? decltype(row_grams){} : load_grams(store_col);
    const auto& col_grams = same ? row_grams : col_grams_storage;

    SimilarityDiagram d{rows, cols, Matrix(rows.size(), cols.size()), Metric::cka, layer, store_row.run_id(),
                        store_col.run_id()};
    auto pair_value = [&](std::size_t i, std::size_t j) {
        double sum = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            sum += cka_from_centered(row_grams[i][b], col_grams[j][b], denom);
        }
        return sum / static_cast<double>(nb);
    };
    if (same) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = i; j < rows.size(); ++j) {
                pairs.emplace_back(i, j);
            }
        }
        parallel_for(pairs.size(), jobs, [&](std::size_t k) {
            const auto [i, j] = pairs[k];
            const double v = pair_value(i, j);
            d.values(i, j) = v;
            d.values(j, i) = v;
        });
    } else {
        parallel_for(rows.size() * cols.size(), jobs, [&](std::size_t k) {
            const std::size_t i = k / cols.size();
            const std::size_t j = k % cols.size();
            d.values(i, j) = pair_value(i, j);
        });
    }
    return d;
}

}  // namespace repdyn
