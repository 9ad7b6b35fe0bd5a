#include "repdyn/dataset.hpp"

#include <algorithm>

#include "repdyn/error.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/tensor_io.hpp"

namespace repdyn {

namespace {

void fill_split(Matrix& x, std::vector<std::uint32_t>& y, std::uint32_t n, const Matrix& prototypes,
                const DatasetSpec& spec, SplitMix64& rng) {
    const std::size_t d = prototypes.cols;
    x = Matrix(n, d);
    y.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t c = i % spec.num_classes;
        y[i] = c;
        for (std::size_t k = 0; k < d; ++k) {
            double v = prototypes(c, k) + spec.noise_std * rng.normal();
            if (spec.bounded_pixels) {
                v = std::clamp(v, spec.pixel_min, spec.pixel_max);
            }
            x(i, k) = v;
        }
    }
}

Matrix read_inputs(const std::string& path, std::uint32_t dim) {
    const Tensor t = read_tensor(path);
    if (t.dtype() != DType::f32 && t.dtype() != DType::f64) {
        fail(ErrorKind::config, path + ": inputs must be f32 or f64");
    }
    std::uint64_t per_row = 1;
    for (std::size_t i = 1; i < t.ndim(); ++i) {
        per_row *= t.dim(i);
    }
    if (t.ndim() < 2 || per_row != dim) {
        fail(ErrorKind::config, path + ": input rows must have C*H*W = " + std::to_string(dim) + " values");
    }
    Matrix m(t.dim(0), dim);
    if (t.dtype() == DType::f32) {
        std::copy(t.f32().begin(), t.f32().end(), m.data.begin());
    } else {
        std::copy(t.f64().begin(), t.f64().end(), m.data.begin());
    }
    return m;
}

std::vector<std::uint32_t> read_labels(const std::string& path, std::size_t n, std::uint32_t num_classes) {
    const Tensor t = read_tensor(path);
    if (t.dtype() != DType::u32 || t.ndim() != 1 || t.dim(0) != n) {
        fail(ErrorKind::config, path + ": labels must be a u32 vector with one entry per input row");
    }
    std::vector<std::uint32_t> y(t.u32().begin(), t.u32().end());
    for (auto v : y) {
        if (v >= num_classes) {
            fail(ErrorKind::config, path + ": label " + std::to_string(v) + " out of range");
        }
    }
    return y;
}

}  // namespace

Dataset make_synthetic_dataset(const DatasetSpec& spec) {
    spec.validate();
    SplitMix64 rng(spec.seed);
    const std::uint32_t d = spec.input_dim();
    const double lo = spec.bounded_pixels ? spec.pixel_min : 0.0;
    const double hi = spec.bounded_pixels ? spec.pixel_max : 1.0;
    Matrix prototypes(spec.num_classes, d);
    for (auto& v : prototypes.data) {
        v = rng.uniform(lo, hi);
    }
    Dataset ds;
    ds.num_classes = spec.num_classes;
    ds.channels = spec.channels;
    ds.height = spec.height;
    ds.width = spec.width;
    fill_split(ds.train_x, ds.train_y, spec.n_train, prototypes, spec, rng);
    fill_split(ds.test_x, ds.test_y, spec.n_test, prototypes, spec, rng);
    return ds;
}

Dataset load_dataset(const DatasetSpec& spec) {
    if (spec.kind == "synthetic") {
        return make_synthetic_dataset(spec);
    }
    spec.validate();
    Dataset ds;
    ds.num_classes = spec.num_classes;
    ds.channels = spec.channels;
    ds.height = spec.height;
    ds.width = spec.width;
    ds.train_x = read_inputs(spec.train_inputs, spec.input_dim());
    ds.train_y = read_labels(spec.train_labels, ds.train_x.rows, spec.num_classes);
    ds.test_x = read_inputs(spec.test_inputs, spec.input_dim());
    ds.test_y = read_labels(spec.test_labels, ds.test_x.rows, spec.num_classes);
    return ds;
}

}  // namespace repdyn
