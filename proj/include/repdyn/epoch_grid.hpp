#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace repdyn {

/// Strictly increasing list of epochs at which checkpoints and analyses are taken.
/// Epoch 0 is the initialized network before any update.
class EpochGrid {
public:
    EpochGrid() = default;
    explicit EpochGrid(std::vector<std::uint32_t> epochs);

    const std::vector<std::uint32_t>& epochs() const noexcept { return epochs_; }
    std::size_t size() const noexcept { return epochs_.size(); }
    bool empty() const noexcept { return epochs_.empty(); }
    std::uint32_t operator[](std::size_t i) const { return epochs_[i]; }
    std::uint32_t back() const { return epochs_.back(); }
    auto begin() const noexcept { return epochs_.begin(); }
    auto end() const noexcept { return epochs_.end(); }

    bool contains(std::uint32_t epoch) const noexcept;
    std::optional<std::size_t> index_of(std::uint32_t epoch) const noexcept;

    friend bool operator==(const EpochGrid&, const EpochGrid&) = default;

private:
    std::vector<std::uint32_t> epochs_;
};

/// All epochs up to 300, every step_mid-th epoch from 300 to 900, every step_late-th epoch
/// from 900 on; truncated at total_epochs - 1.
EpochGrid dense_epoch_grid(std::uint32_t total_epochs = 4000, std::uint32_t step_mid = 3, std::uint32_t step_late = 5);

/// Membership test for dense_epoch_grid before truncation. The mid and late phases are
/// anchored at epochs 300 and 900.
bool in_dense_grid(std::uint32_t epoch, std::uint32_t step_mid = 3, std::uint32_t step_late = 5) noexcept;

/// {0, step, 2*step, ...} up to and including last.
EpochGrid uniform_epoch_grid(std::uint32_t last, std::uint32_t step);

}  // namespace repdyn
