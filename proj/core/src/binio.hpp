#pragma once

// Little-endian binary primitives shared by the dataset and weight-file
// readers/writers. Multi-byte values are assembled bytewise so the formats
// stay portable across host endianness.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpk::binio {

inline void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<unsigned char>(u >> (8 * i));
    }
    put_bytes(out, buf, sizeof(T));
}

inline void put_f32_le(std::ostream& out, float value) {
    put_le(out, std::bit_cast<std::uint32_t>(value));
}

inline void put_f64_le(std::ostream& out, double value) {
    put_le(out, std::bit_cast<std::uint64_t>(value));
}

inline void get_bytes(std::istream& in, void* p, std::size_t n,
                      const std::string& what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw std::runtime_error("truncated file while reading " + what);
    }
}

template <typename T>
T get_le(std::istream& in, const std::string& what) {
    unsigned char buf[sizeof(T)];
    get_bytes(in, buf, sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
    }
    return static_cast<T>(u);
}

inline float get_f32_le(std::istream& in, const std::string& what) {
    return std::bit_cast<float>(get_le<std::uint32_t>(in, what));
}

inline double get_f64_le(std::istream& in, const std::string& what) {
    return std::bit_cast<double>(get_le<std::uint64_t>(in, what));
}

// Bulk float32 transfers: on little-endian hosts this is a straight memcpy
// of the vector storage, otherwise falls back to the bytewise path.

inline void put_f32_block(std::ostream& out, const float* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        put_bytes(out, data, n * sizeof(float));
    } else {
        for (std::size_t i = 0; i < n; ++i) put_f32_le(out, data[i]);
    }
}

inline void get_f32_block(std::istream& in, float* data, std::size_t n,
                          const std::string& what) {
    if constexpr (std::endian::native == std::endian::little) {
        get_bytes(in, data, n * sizeof(float), what);
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = get_f32_le(in, what);
    }
}

} // namespace bpk::binio
