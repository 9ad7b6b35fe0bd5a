#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "repdyn/checkpoint.hpp"
#include "repdyn/similarity.hpp"
#include "repdyn/tensor.hpp"

namespace repdyn {

struct HsicValue {
    double value = 0.0;
};

/// Sample-size normalization of HSIC_0. CKA is identical under both; only raw HSIC differs.
enum class HsicDenominator { m_minus_1, m_minus_1_squared };

/// Disjoint example batches over the probe set; CKA is averaged over them.
struct CkaBatchPlan {
    std::vector<std::vector<std::size_t>> batches;

    std::size_t batch_count() const noexcept { return batches.size(); }
};

/// Class-stratified plan: examples are interleaved round-robin across classes (each class in
/// ascending index order) and dealt to batches in turn, so every batch holds an almost equal
/// number of examples per class. batch_size 0 means floor(m / batch_count).
CkaBatchPlan make_batch_plan(std::span<const std::uint32_t> labels, std::size_t batch_count,
                             std::size_t batch_size = 0);

/// One batch holding every example in order.
CkaBatchPlan full_batch_plan(std::size_t m);

/// Throws unless batches are disjoint, in range for m, and each has at least 2 examples.
void validate(const CkaBatchPlan& plan, std::size_t m);

/// K = F F^T in f64.
Matrix gram(const Matrix& f);
Matrix gram(const RepresentationMatrix& f);

/// H K H via row/column mean subtraction. Requires a square matrix with m >= 2.
Matrix center(const Matrix& k);

/// vec(Kc) . vec(Lc) / (m - 1).
HsicValue hsic0(const Matrix& kc, const Matrix& lc, HsicDenominator denom = HsicDenominator::m_minus_1);

/// Linear CKA between F and G restricted to the `batch` rows. Throws Error(numeric) when either
/// representation has zero centered variance on the batch.
double cka(const RepresentationMatrix& f, const RepresentationMatrix& g, std::span<const std::size_t> batch,
           HsicDenominator denom = HsicDenominator::m_minus_1);
double cka(const RepresentationMatrix& f, const RepresentationMatrix& g);
/// Full-set CKA on f64 activations.
double cka(const Matrix& f, const Matrix& g, HsicDenominator denom = HsicDenominator::m_minus_1);

/// Mean of per-batch CKA values.
double batched_cka(const RepresentationMatrix& f, const RepresentationMatrix& g, const CkaBatchPlan& plan);

/// CKA between `layer` at every pair of (row-store epoch, column-store epoch). When both handles
/// refer to the same store only the upper triangle is evaluated and mirrored.
SimilarityDiagram cka_diagram(const CheckpointStore& store_row, const CheckpointStore& store_col,
                              const std::string& layer, const CkaBatchPlan& plan, unsigned jobs = 0);

}  // namespace repdyn
