#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repdyn/config.hpp"
#include "repdyn/tensor.hpp"

namespace repdyn {

struct Parameter {
    std::string name;   // e.g. "conv1.weight"
    std::string layer;  // owning layer, e.g. "conv1"
    Shape shape;
    std::vector<double> value;
};

/// Desk-scale reference classifiers.
///
/// conv2: 3x3 convolution (width_k channels, stride 1, zero padding 1), ReLU, 2x2 average
///        pool, flatten, fully connected to the classes. Analysed layers: conv1 (the pooled
///        features) and fc (the logits).
/// mlp:   fully connected to width_k units, ReLU, fully connected to the classes.
///        Analysed layers: fc1 (post-ReLU) and fc (the logits).
class Model {
public:
    Model(ModelKind kind, std::uint32_t channels, std::uint32_t height, std::uint32_t width, std::uint32_t width_k,
          std::uint32_t num_classes);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias, drawn in parameter order.
    void initialize(std::uint64_t seed);

    ModelKind kind() const noexcept { return kind_; }
    std::uint32_t num_classes() const noexcept { return classes_; }
    std::size_t input_dim() const noexcept { return std::size_t{channels_} * height_ * width_; }
    std::vector<std::string> layer_names() const { return repdyn::layer_names(kind_); }
    std::size_t feature_dim(std::string_view layer) const;

    std::vector<Parameter>& parameters() noexcept { return params_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }

    /// Activations of `layer` for each input row.
    Matrix features(const Matrix& x, std::string_view layer) const;
    Matrix logits(const Matrix& x) const { return features(x, "fc"); }
    /// Argmax of the logits per row (lowest index on ties).
    std::vector<std::uint32_t> predict(const Matrix& x) const;

    /// Mean cross-entropy over x.row(r) for r in rows; writes d(loss)/d(param) into grads,
    /// one buffer per parameter (resized as needed).
    double loss_and_grad(const Matrix& x, std::span<const std::uint32_t> y, std::span<const std::size_t> rows,
                         std::vector<std::vector<double>>& grads) const;

    void save(const std::filesystem::path& dir) const;
    void load(const std::filesystem::path& dir);

private:
    struct Scratch;
    void hidden_forward(std::span<const double> in, Scratch& s) const;
    void head_forward(Scratch& s) const;

    ModelKind kind_;
    std::uint32_t channels_, height_, width_, width_k_, classes_;
    std::size_t hidden_dim_;
    std::vector<Parameter> params_;
};

}  // namespace repdyn
