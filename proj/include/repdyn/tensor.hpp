#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace repdyn {

enum class DType : std::uint8_t { f32 = 0, f64 = 1, u32 = 2 };

const char* dtype_name(DType d) noexcept;
std::size_t dtype_size(DType d) noexcept;

using Shape = std::vector<std::uint64_t>;

/// Dense row-major array with 1 to 4 dimensions, each of size >= 1.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<float> data);
    Tensor(Shape shape, std::vector<double> data);
    Tensor(Shape shape, std::vector<std::uint32_t> data);

    DType dtype() const noexcept { return static_cast<DType>(data_.index()); }
    const Shape& shape() const noexcept { return shape_; }
    std::size_t ndim() const noexcept { return shape_.size(); }
    std::uint64_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const noexcept;
    bool empty() const noexcept { return shape_.empty(); }

    std::span<const float> f32() const;
    std::span<const double> f64() const;
    std::span<const std::uint32_t> u32() const;
    std::span<float> f32();
    std::span<double> f64();
    std::span<std::uint32_t> u32();

    /// True when every floating-point element is finite (always true for u32).
    bool all_finite() const noexcept;

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    void validate() const;

    Shape shape_;
    std::variant<std::vector<float>, std::vector<double>, std::vector<std::uint32_t>> data_;
};

/// Dense f64 row-major matrix used for all similarity and training arithmetic.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Upcasts a 2-D f32 or f64 tensor.
Matrix to_matrix(const Tensor& t);
Tensor to_f32_tensor(const Matrix& m);
Tensor to_f64_tensor(const Matrix& m);

/// Layer activations for m probe examples (rows) and p neurons (columns).
struct RepresentationMatrix {
    std::uint32_t epoch = 0;
    std::string layer_name;
    Tensor matrix;  // f32 [m, p]

    std::size_t examples() const { return matrix.dim(0); }
    std::size_t neurons() const { return matrix.dim(1); }
};

/// Throws unless the matrix is 2-D f32 with m >= 2 and all entries finite.
void validate(const RepresentationMatrix& r);

RepresentationMatrix make_representation(const Matrix& m, std::uint32_t epoch = 0, std::string layer = "x");

}  // namespace repdyn
