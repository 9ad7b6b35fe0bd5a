#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

namespace repdyn {

/// Index of the largest score; ties go to the lowest index.
inline std::uint32_t argmax_lowest(std::span<const double> scores) noexcept {
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) {
            best = c;
        }
    }
    return best;
}

/// Writes softmax(scores) into probs using max subtraction; returns -log probs[label].
inline double softmax_cross_entropy(std::span<const double> scores, std::uint32_t label, std::span<double> probs) {
    const double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        probs[c] = std::exp(scores[c] - mx);
        sum += probs[c];
    }
    for (double& p : probs) {
        p /= sum;
    }
    return -(scores[label] - mx - std::log(sum));
}

}  // namespace repdyn
