#include "loyalty/sha.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace loyalty {

static void digest(const EVP_MD* md, std::span<const uint8_t> data, uint8_t* out, unsigned out_len) {
    unsigned got = 0;
    if (EVP_Digest(data.data(), data.size(), out, &got, md, nullptr) != 1 || got != out_len)
        throw std::runtime_error("digest failed");
}

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data) {
    std::array<uint8_t, 32> out{};
    digest(EVP_sha256(), data, out.data(), 32);
    return out;
}

std::array<uint8_t, 64> sha512(std::span<const uint8_t> data) {
    std::array<uint8_t, 64> out{};
    digest(EVP_sha512(), data, out.data(), 64);
    return out;
}

}  // namespace loyalty
