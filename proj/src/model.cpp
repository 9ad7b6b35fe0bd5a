#include "repdyn/model.hpp"

#include <cmath>

#include "repdyn/error.hpp"
#include "repdyn/nn_math.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/tensor_io.hpp"

namespace repdyn {

namespace {

// Parameter slots, identical for both architectures.
constexpr std::size_t kHiddenW = 0;
constexpr std::size_t kHiddenB = 1;
constexpr std::size_t kHeadW = 2;
constexpr std::size_t kHeadB = 3;

std::size_t product(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) {
        n *= d;
    }
    return n;
}

}  // namespace

struct Model::Scratch {
    std::vector<double> pre;     // conv: k*H*W pre-activations; mlp: k
    std::vector<double> hidden;  // analysed hidden features
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> d_hidden;
    std::vector<double> d_pre;
};

Model::Model(ModelKind kind, std::uint32_t channels, std::uint32_t height, std::uint32_t width, std::uint32_t width_k,
             std::uint32_t num_classes)
    : kind_(kind), channels_(channels), height_(height), width_(width), width_k_(width_k), classes_(num_classes) {
    require(channels >= 1 && height >= 1 && width >= 1 && width_k >= 1, "model dimensions must be >= 1");
    require(num_classes >= 2, "model needs at least 2 classes");
    const std::string hidden = kind == ModelKind::conv2 ? "conv1" : "fc1";
    if (kind == ModelKind::conv2) {
        require(height >= 2 && width >= 2, "conv2 needs images of at least 2x2 for pooling");
        hidden_dim_ = std::size_t{width_k} * (height / 2) * (width / 2);
        params_.push_back({hidden + ".weight", hidden, {width_k, channels, 3, 3}, {}});
    } else {
        hidden_dim_ = width_k;
        params_.push_back({hidden + ".weight", hidden, {width_k, input_dim()}, {}});
    }
    params_.push_back({hidden + ".bias", hidden, {width_k}, {}});
    params_.push_back({"fc.weight", "fc", {num_classes, hidden_dim_}, {}});
    params_.push_back({"fc.bias", "fc", {num_classes}, {}});
    for (auto& p : params_) {
        p.value.assign(product(p.shape), 0.0);
    }
}

void Model::initialize(std::uint64_t seed) {
    SplitMix64 rng(seed);
    const double hidden_fan_in = kind_ == ModelKind::conv2 ? channels_ * 9.0 : static_cast<double>(input_dim());
    const double fan_ins[4] = {hidden_fan_in, hidden_fan_in, static_cast<double>(hidden_dim_),
                               static_cast<double>(hidden_dim_)};
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const double bound = 1.0 / std::sqrt(fan_ins[i]);
        for (double& v : params_[i].value) {
            v = rng.uniform(-bound, bound);
        }
    }
}

std::size_t Model::feature_dim(std::string_view layer) const {
    if (layer == "fc") {
        return classes_;
    }
    if (layer == params_[kHiddenW].layer) {
        return hidden_dim_;
    }
    fail(ErrorKind::missing_input, "model has no layer '" + std::string(layer) + "'");
}

void Model::hidden_forward(std::span<const double> in, Scratch& s) const {
    const auto& w = params_[kHiddenW].value;
    const auto& b = params_[kHiddenB].value;
    s.hidden.assign(hidden_dim_, 0.0);
    if (kind_ == ModelKind::mlp) {
        s.pre.resize(width_k_);
        const std::size_t d = input_dim();
        for (std::size_t o = 0; o < width_k_; ++o) {
            double acc = b[o];
            const double* wr = w.data() + o * d;
            for (std::size_t i = 0; i < d; ++i) {
                acc += wr[i] * in[i];
            }
            s.pre[o] = acc;
            s.hidden[o] = acc > 0.0 ? acc : 0.0;
        }
        return;
    }
    const std::size_t H = height_, W = width_, C = channels_;
    const std::size_t Hp = H / 2, Wp = W / 2;
    s.pre.resize(std::size_t{width_k_} * H * W);
    for (std::size_t o = 0; o < width_k_; ++o) {
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                double acc = b[o];
                for (std::size_t c = 0; c < C; ++c) {
                    const double* wk = w.data() + (o * C + c) * 9;
                    const double* img = in.data() + c * H * W;
                    for (std::size_t ky = 0; ky < 3; ++ky) {
                        const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y + ky) - 1;
                        if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(H)) continue;
                        for (std::size_t kx = 0; kx < 3; ++kx) {
                            const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x + kx) - 1;
                            if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(W)) continue;
                            acc += wk[ky * 3 + kx] * img[yy * W + xx];
                        }
                    }
                }
                s.pre[(o * H + y) * W + x] = acc;
                if (y < 2 * Hp && x < 2 * Wp && acc > 0.0) {
                    s.hidden[(o * Hp + y / 2) * Wp + x / 2] += 0.25 * acc;
                }
            }
        }
    }
}

void Model::head_forward(Scratch& s) const {
    const auto& w = params_[kHeadW].value;
    const auto& b = params_[kHeadB].value;
    s.logits.resize(classes_);
    for (std::size_t j = 0; j < classes_; ++j) {
        double acc = b[j];
        const double* wr = w.data() + j * hidden_dim_;
        for (std::size_t f = 0; f < hidden_dim_; ++f) {
            acc += wr[f] * s.hidden[f];
        }
        s.logits[j] = acc;
    }
}

Matrix Model::features(const Matrix& x, std::string_view layer) const {
    require(x.cols == input_dim(), "model input has " + std::to_string(x.cols) + " columns, expected " +
                                       std::to_string(input_dim()));
    const bool head = layer == "fc";
    const std::size_t dim = feature_dim(layer);
    Matrix out(x.rows, dim);
    Scratch s;
    for (std::size_t r = 0; r < x.rows; ++r) {
        hidden_forward(x.row(r), s);
        if (head) {
            head_forward(s);
            std::copy(s.logits.begin(), s.logits.end(), out.row(r).begin());
        } else {
            std::copy(s.hidden.begin(), s.hidden.end(), out.row(r).begin());
        }
    }
    return out;
}

std::vector<std::uint32_t> Model::predict(const Matrix& x) const {
    const Matrix scores = logits(x);
    std::vector<std::uint32_t> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        out[r] = argmax_lowest(scores.row(r));
    }
    return out;
}

double Model::loss_and_grad(const Matrix& x, std::span<const std::uint32_t> y, std::span<const std::size_t> rows,
                            std::vector<std::vector<double>>& grads) const {
    require(!rows.empty(), "loss_and_grad needs at least one row");
    require(x.cols == input_dim(), "model input dimension mismatch");
    grads.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        grads[i].assign(params_[i].value.size(), 0.0);
    }
    auto& gw = grads[kHiddenW];
    auto& gb = grads[kHiddenB];
    auto& gfw = grads[kHeadW];
    auto& gfb = grads[kHeadB];
    const auto& fw = params_[kHeadW].value;
    const double scale = 1.0 / static_cast<double>(rows.size());

    Scratch s;
    s.probs.resize(classes_);
    double loss = 0.0;
    for (std::size_t r : rows) {
        require(y[r] < classes_, "label out of range");
        const auto in = x.row(r);
        hidden_forward(in, s);
        head_forward(s);
        loss += softmax_cross_entropy(s.logits, y[r], s.probs);

        s.probs[y[r]] -= 1.0;
        s.d_hidden.assign(hidden_dim_, 0.0);
        for (std::size_t j = 0; j < classes_; ++j) {
            const double dl = s.probs[j] * scale;
            gfb[j] += dl;
            double* gr = gfw.data() + j * hidden_dim_;
            const double* wr = fw.data() + j * hidden_dim_;
            for (std::size_t f = 0; f < hidden_dim_; ++f) {
                gr[f] += dl * s.hidden[f];
                s.d_hidden[f] += dl * wr[f];
            }
        }

        if (kind_ == ModelKind::mlp) {
            const std::size_t d = input_dim();
            for (std::size_t o = 0; o < width_k_; ++o) {
                if (s.pre[o] <= 0.0) continue;
                const double dp = s.d_hidden[o];
                gb[o] += dp;
                double* gr = gw.data() + o * d;
                for (std::size_t i = 0; i < d; ++i) {
                    gr[i] += dp * in[i];
                }
            }
            continue;
        }

        const std::size_t H = height_, W = width_, C = channels_;
        const std::size_t Hp = H / 2, Wp = W / 2;
        for (std::size_t o = 0; o < width_k_; ++o) {
            for (std::size_t y0 = 0; y0 < 2 * Hp; ++y0) {
                for (std::size_t x0 = 0; x0 < 2 * Wp; ++x0) {
                    if (s.pre[(o * H + y0) * W + x0] <= 0.0) continue;
                    const double dp = 0.25 * s.d_hidden[(o * Hp + y0 / 2) * Wp + x0 / 2];
                    gb[o] += dp;
                    for (std::size_t c = 0; c < C; ++c) {
                        double* gk = gw.data() + (o * C + c) * 9;
                        const double* img = in.data() + c * H * W;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y0 + ky) - 1;
                            if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(H)) continue;
                            for (std::size_t kx = 0; kx < 3; ++kx) {
                                const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x0 + kx) - 1;
                                if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(W)) continue;
                                gk[ky * 3 + kx] += dp * img[yy * W + xx];
                            }
                        }
                    }
                }
            }
        }
    }
    return loss * scale;
}

void Model::save(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    }
    for (const auto& p : params_) {
        write_tensor(dir / (p.name + ".rdt"), Tensor(p.shape, p.value));
    }
}

void Model::load(const std::filesystem::path& dir) {
    for (auto& p : params_) {
        const Tensor t = read_tensor(dir / (p.name + ".rdt"));
        if (t.dtype() != DType::f64 || t.shape() != p.shape) {
            fail(ErrorKind::io, (dir / (p.name + ".rdt")).string() + ": parameter shape or dtype mismatch");
        }
        p.value.assign(t.f64().begin(), t.f64().end());
    }
}

}  // namespace repdyn
