#include "repdyn/optim.hpp"

#include <cmath>

#include "repdyn/error.hpp"

namespace repdyn {

namespace {

void check_shapes(std::span<double> params, std::span<const double> grads, std::size_t state_size) {
    require(params.size() == grads.size(), "optimizer: parameter and gradient sizes differ");
    require(state_size == 0 || state_size == params.size(), "optimizer: state size does not match parameters");
}

void apply_decoupled_decay(std::span<double> params, const OptimizerConfig& cfg) {
    if (cfg.decoupled_weight_decay && cfg.weight_decay != 0.0) {
        const double shrink = cfg.learning_rate * cfg.weight_decay;
        for (double& p : params) {
            p -= shrink * p;
        }
    }
}

double coupled_decay(const OptimizerConfig& cfg) { return cfg.decoupled_weight_decay ? 0.0 : cfg.weight_decay; }

}  // namespace

void sgd_step(std::span<double> params, std::span<const double> grads, SgdState& state, const OptimizerConfig& cfg) {
    check_shapes(params, grads, state.velocity.size());
    if (state.velocity.empty()) {
        state.velocity.assign(params.size(), 0.0);
    }
    const double wd = coupled_decay(cfg);
    apply_decoupled_decay(params, cfg);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& v = state.velocity[i];
        v = cfg.momentum * v + grads[i] + wd * params[i];
        params[i] -= cfg.learning_rate * v;
    }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const OptimizerConfig& cfg) {
    check_shapes(params, grads, state.m.size());
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    const double wd = coupled_decay(cfg);
    apply_decoupled_decay(params, cfg);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i] + wd * params[i];
        double& m = state.m[i];
        double& v = state.v[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m / correction1;
        const double v_hat = v / correction2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

Optimizer::Optimizer(OptimizerConfig cfg, std::size_t buffers) : cfg_(cfg), sgd_(buffers), adam_(buffers) {
    cfg_.validate();
}

void Optimizer::step(std::size_t buffer, std::span<double> params, std::span<const double> grads) {
    require(buffer < sgd_.size(), "optimizer: buffer index out of range");
    if (cfg_.kind == OptimizerKind::sgd) {
        sgd_step(params, grads, sgd_[buffer], cfg_);
    } else {
        adam_step(params, grads, adam_[buffer], cfg_);
    }
}

}  // namespace repdyn
