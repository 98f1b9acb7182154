#pragma once

#include <array>

#include "loyalty/bytes.hpp"

namespace loyalty {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);
std::array<uint8_t, 64> sha512(std::span<const uint8_t> data);

}  // namespace loyalty
