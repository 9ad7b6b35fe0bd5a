#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "repdyn/tensor.hpp"

namespace repdyn {

// REPDYN01 layout, all little-endian:
//   [0, 8)          magic "REPDYN01"
//   [8]             dtype code (0 f32, 1 f64, 2 u32)
//   [9]             ndim in 1..4
//   [10, 10+8*ndim) dimension sizes as u64
//   remainder       row-major element data
inline constexpr char kTensorMagic[8] = {'R', 'E', 'P', 'D', 'Y', 'N', '0', '1'};

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

struct TensorHeader {
    DType dtype;
    Shape shape;
};

/// Parses only the header, and checks the file size against it, without loading the payload.
TensorHeader read_tensor_header(const std::filesystem::path& path);

}  // namespace repdyn
