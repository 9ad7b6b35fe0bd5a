#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "repdyn/config.hpp"

namespace repdyn {

struct SgdState {
    std::vector<double> velocity;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

/// Heavy-ball SGD: v <- momentum*v + g (+ wd*theta), theta <- theta - lr*v.
/// State buffers are sized lazily on the first call.
void sgd_step(std::span<double> params, std::span<const double> grads, SgdState& state, const OptimizerConfig& cfg);

/// Adam with bias correction. Increments state.t before updating, so the first call runs with t = 1.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const OptimizerConfig& cfg);

/// One optimizer state per parameter buffer, dispatching on cfg.kind.
class Optimizer {
public:
    Optimizer(OptimizerConfig cfg, std::size_t buffers);

    void step(std::size_t buffer, std::span<double> params, std::span<const double> grads);
    const OptimizerConfig& config() const noexcept { return cfg_; }

private:
    OptimizerConfig cfg_;
    std::vector<SgdState> sgd_;
    std::vector<AdamState> adam_;
};

}  // namespace repdyn
