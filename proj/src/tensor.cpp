#include "repdyn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "repdyn/error.hpp"

namespace repdyn {

const char* dtype_name(DType d) noexcept {
    switch (d) {
        case DType::f32: return "f32";
        case DType::f64: return "f64";
        case DType::u32: return "u32";
    }
    return "?";
}

std::size_t dtype_size(DType d) noexcept { return d == DType::f64 ? 8 : 4; }

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) { validate(); }
Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) { validate(); }
Tensor::Tensor(Shape shape, std::vector<std::uint32_t> data) : shape_(std::move(shape)), data_(std::move(data)) {
    validate();
}

void Tensor::validate() const {
    require(!shape_.empty() && shape_.size() <= 4, "tensor ndim must be in 1..4");
    std::uint64_t count = 1;
    for (auto d : shape_) {
        require(d >= 1, "tensor dimension sizes must be >= 1");
        count *= d;
    }
    const std::size_t n = std::visit([](const auto& v) { return v.size(); }, data_);
    require(count == n, "tensor shape product " + std::to_string(count) + " does not match element count " +
                            std::to_string(n));
}

std::size_t Tensor::size() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, data_);
}

namespace {

template <class T, class V>
auto checked_span(V& variant, DType want, DType have) {
    if (want != have) {
        fail(ErrorKind::invalid_argument,
             std::string("tensor dtype is ") + dtype_name(have) + ", expected " + dtype_name(want));
    }
    return std::span(std::get<std::vector<T>>(variant));
}

}  // namespace

std::span<const float> Tensor::f32() const { return checked_span<float>(data_, DType::f32, dtype()); }
std::span<const double> Tensor::f64() const { return checked_span<double>(data_, DType::f64, dtype()); }
std::span<const std::uint32_t> Tensor::u32() const {
    return checked_span<std::uint32_t>(data_, DType::u32, dtype());
}
std::span<float> Tensor::f32() { return checked_span<float>(data_, DType::f32, dtype()); }
std::span<double> Tensor::f64() { return checked_span<double>(data_, DType::f64, dtype()); }
std::span<std::uint32_t> Tensor::u32() { return checked_span<std::uint32_t>(data_, DType::u32, dtype()); }

bool Tensor::all_finite() const noexcept {
    return std::visit(
        [](const auto& v) {
            return std::all_of(v.begin(), v.end(), [](auto x) { return std::isfinite(static_cast<double>(x)); });
        },
        data_);
}

Matrix to_matrix(const Tensor& t) {
    require(t.ndim() == 2, "expected a 2-D tensor");
    Matrix m(t.dim(0), t.dim(1));
    if (t.dtype() == DType::f32) {
        std::copy(t.f32().begin(), t.f32().end(), m.data.begin());
    } else if (t.dtype() == DType::f64) {
        std::copy(t.f64().begin(), t.f64().end(), m.data.begin());
    } else {
        fail(ErrorKind::invalid_argument, "expected a floating-point tensor");
    }
    return m;
}

Tensor to_f32_tensor(const Matrix& m) {
    std::vector<float> v(m.data.size());
    std::transform(m.data.begin(), m.data.end(), v.begin(), [](double x) { return static_cast<float>(x); });
    return Tensor({m.rows, m.cols}, std::move(v));
}

Tensor to_f64_tensor(const Matrix& m) { return Tensor({m.rows, m.cols}, m.data); }

void validate(const RepresentationMatrix& r) {
    require(r.matrix.ndim() == 2 && r.matrix.dtype() == DType::f32,
            "representation of layer '" + r.layer_name + "' must be a 2-D f32 tensor");
    require(r.matrix.dim(0) >= 2, "representation needs at least 2 examples");
    if (!r.matrix.all_finite()) {
        fail(ErrorKind::numeric, "representation of layer '" + r.layer_name + "' has non-finite entries");
    }
}

RepresentationMatrix make_representation(const Matrix& m, std::uint32_t epoch, std::string layer) {
    RepresentationMatrix r{epoch, std::move(layer), to_f32_tensor(m)};
    return r;
}

}  // namespace repdyn
