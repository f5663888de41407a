#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace sb::io {

inline void write_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<char*>(b), 2);
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

inline void write_u8(std::ostream& out, std::uint8_t v) {
    out.put(static_cast<char>(v));
}

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<char*>(b), 8);
}

inline std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24);
}

inline std::uint8_t read_u8(std::istream& in) {
    return static_cast<std::uint8_t>(in.get());
}

inline double read_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

}  // namespace sb::io
