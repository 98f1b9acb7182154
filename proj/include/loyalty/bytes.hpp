#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace loyalty {

using Bytes = std::vector<uint8_t>;

inline void append(Bytes& out, std::span<const uint8_t> more) {
    out.insert(out.end(), more.begin(), more.end());
}

inline void append(Bytes& out, const std::string& s) {
    out.insert(out.end(), s.begin(), s.end());
}

inline void append_u8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void append_u32be(Bytes& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

inline void append_u64be(Bytes& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline uint32_t read_u32be(std::span<const uint8_t> in) {
    return (uint32_t(in[0]) << 24) | (uint32_t(in[1]) << 16) | (uint32_t(in[2]) << 8) | uint32_t(in[3]);
}

inline uint64_t read_u64be(std::span<const uint8_t> in) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
    return v;
}

std::string to_hex(std::span<const uint8_t> data);
std::optional<Bytes> from_hex(const std::string& hex);

// RFC 4648 url-safe alphabet, no padding.
std::string base64url_encode(std::span<const uint8_t> data);
std::optional<Bytes> base64url_decode(const std::string& text);

inline Bytes as_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace loyalty
