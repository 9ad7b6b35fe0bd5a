#include "repdyn/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "repdyn/error.hpp"

namespace repdyn {

namespace {

template <class U>
void put_le(std::vector<std::byte>& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
    }
}

template <class U>
U get_le(const std::byte* p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        v |= static_cast<U>(std::to_integer<std::uint8_t>(p[i])) << (8 * i);
    }
    return v;
}

template <class T, class Bits>
void put_elements(std::vector<std::byte>& out, std::span<const T> values) {
    for (T x : values) {
        put_le(out, std::bit_cast<Bits>(x));
    }
}

template <class T, class Bits>
std::vector<T> get_elements(const std::byte* p, std::size_t n) {
    std::vector<T> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::bit_cast<T>(get_le<Bits>(p + i * sizeof(T)));
    }
    return v;
}

}  // namespace

std::vector<std::byte> encode_tensor(const Tensor& t) {
    require(!t.empty(), "cannot encode an empty tensor");
    if (!t.all_finite()) {
        fail(ErrorKind::numeric, "tensor contains non-finite values");
    }
    std::vector<std::byte> out;
    out.reserve(10 + 8 * t.ndim() + t.size() * dtype_size(t.dtype()));
    for (char c : kTensorMagic) {
        out.push_back(static_cast<std::byte>(c));
    }
    out.push_back(static_cast<std::byte>(t.dtype()));
    out.push_back(static_cast<std::byte>(t.ndim()));
    for (auto d : t.shape()) {
        put_le<std::uint64_t>(out, d);
    }
    switch (t.dtype()) {
        case DType::f32: put_elements<float, std::uint32_t>(out, t.f32()); break;
        case DType::f64: put_elements<double, std::uint64_t>(out, t.f64()); break;
        case DType::u32: put_elements<std::uint32_t, std::uint32_t>(out, t.u32()); break;
    }
    return out;
}

namespace {

TensorHeader decode_header(std::span<const std::byte> bytes, std::size_t& header_size) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kTensorMagic, 8) != 0) {
        fail(ErrorKind::io, "bad magic: not a REPDYN01 tensor file");
    }
    if (bytes.size() < 10) {
        fail(ErrorKind::io, "truncated header");
    }
    const auto code = std::to_integer<std::uint8_t>(bytes[8]);
    if (code > 2) {
        fail(ErrorKind::io, "unknown dtype code " + std::to_string(code));
    }
    const auto dtype = static_cast<DType>(code);
    const auto ndim = std::to_integer<std::uint8_t>(bytes[9]);
    if (ndim < 1 || ndim > 4) {
        fail(ErrorKind::io, "invalid ndim " + std::to_string(ndim));
    }
    const std::size_t header = 10 + 8 * std::size_t{ndim};
    if (bytes.size() < header) {
        fail(ErrorKind::io, "truncated header");
    }
    Shape shape(ndim);
    for (std::size_t i = 0; i < ndim; ++i) {
        shape[i] = get_le<std::uint64_t>(bytes.data() + 10 + 8 * i);
        if (shape[i] == 0) {
            fail(ErrorKind::io, "zero dimension size in header");
        }
    }
    header_size = header;
    return {dtype, std::move(shape)};
}

std::uint64_t payload_bytes(const TensorHeader& h) {
    std::uint64_t count = 1;
    for (auto d : h.shape) {
        count *= d;
    }
    return count * dtype_size(h.dtype);
}

void check_payload(const TensorHeader& h, std::uint64_t actual) {
    const std::uint64_t expected = payload_bytes(h);
    if (expected != actual) {
        fail(ErrorKind::io, "payload size mismatch: header implies " + std::to_string(expected) + " bytes, found " +
                                std::to_string(actual));
    }
}

}  // namespace

Tensor decode_tensor(std::span<const std::byte> bytes) {
    std::size_t header = 0;
    TensorHeader h = decode_header(bytes, header);
    check_payload(h, bytes.size() - header);
    const std::size_t count = payload_bytes(h) / dtype_size(h.dtype);
    const std::byte* p = bytes.data() + header;
    switch (h.dtype) {
        case DType::f32: return Tensor(std::move(h.shape), get_elements<float, std::uint32_t>(p, count));
        case DType::f64: return Tensor(std::move(h.shape), get_elements<double, std::uint64_t>(p, count));
        case DType::u32: return Tensor(std::move(h.shape), get_elements<std::uint32_t, std::uint32_t>(p, count));
    }
    fail(ErrorKind::io, "unreachable dtype");
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    const auto bytes = encode_tensor(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        fail(ErrorKind::io, "write failed for " + path.string());
    }
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::missing_input, "cannot open tensor file " + path.string());
    }
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_tensor(std::as_bytes(std::span(raw)));
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace repdyn

namespace repdyn {

TensorHeader read_tensor_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::missing_input, "cannot open tensor file " + path.string());
    }
    std::vector<char> raw(10 + 8 * 4);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    raw.resize(static_cast<std::size_t>(in.gcount()));
    std::error_code ec;
    const auto file_size = std::filesystem::file_size(path, ec);
    if (ec) {
        fail(ErrorKind::io, path.string() + ": " + ec.message());
    }
    try {
        std::size_t header = 0;
        TensorHeader h = decode_header(std::as_bytes(std::span(raw)), header);
        check_payload(h, file_size - header);
        return h;
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace repdyn
