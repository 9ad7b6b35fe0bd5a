#include "repdyn/epoch_grid.hpp"

#include <algorithm>
#include <string>

#include "repdyn/error.hpp"

namespace repdyn {

EpochGrid::EpochGrid(std::vector<std::uint32_t> epochs) : epochs_(std::move(epochs)) {
    for (std::size_t i = 1; i < epochs_.size(); ++i) {
        require(epochs_[i - 1] < epochs_[i], "epoch grid must be strictly increasing (at position " +
                                                 std::to_string(i) + ")");
    }
}

bool EpochGrid::contains(std::uint32_t epoch) const noexcept {
    return std::binary_search(epochs_.begin(), epochs_.end(), epoch);
}

std::optional<std::size_t> EpochGrid::index_of(std::uint32_t epoch) const noexcept {
    auto it = std::lower_bound(epochs_.begin(), epochs_.end(), epoch);
    if (it == epochs_.end() || *it != epoch) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - epochs_.begin());
}

bool in_dense_grid(std::uint32_t epoch, std::uint32_t step_mid, std::uint32_t step_late) noexcept {
    if (epoch <= 300) {
        return true;
    }
    if (epoch <= 900 && (epoch - 300) % step_mid == 0) {
        return true;
    }
    return epoch >= 900 && (epoch - 900) % step_late == 0;
}

EpochGrid dense_epoch_grid(std::uint32_t total_epochs, std::uint32_t step_mid, std::uint32_t step_late) {
    require(total_epochs >= 1, "total_epochs must be >= 1");
    require(step_mid >= 1 && step_late >= 1, "grid steps must be >= 1");
    std::vector<std::uint32_t> out;
    for (std::uint32_t t = 0; t < total_epochs; ++t) {
        if (in_dense_grid(t, step_mid, step_late)) {
            out.push_back(t);
        }
    }
    return EpochGrid(std::move(out));
}

EpochGrid uniform_epoch_grid(std::uint32_t last, std::uint32_t step) {
    require(step >= 1, "grid step must be >= 1");
    std::vector<std::uint32_t> out;
    for (std::uint32_t t = 0; t <= last; t += step) {
        out.push_back(t);
    }
    return EpochGrid(std::move(out));
}

}  // namespace repdyn
