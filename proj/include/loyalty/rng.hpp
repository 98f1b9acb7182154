#pragma once

#include <cstdint>
#include <memory>

#include "loyalty/bytes.hpp"

namespace loyalty {

// Source of randomness for protocol values. Tests inject a seeded
// deterministic source to get reproducible transcripts.
class RandomSource {
  public:
    virtual ~RandomSource() = default;
    virtual void fill(uint8_t* out, size_t n) = 0;

    Bytes bytes(size_t n) {
        Bytes b(n);
        fill(b.data(), n);
        return b;
    }
};

// OS CSPRNG (getrandom / /dev/urandom).
class SystemRandom final : public RandomSource {
  public:
    void fill(uint8_t* out, size_t n) override;
    static SystemRandom& instance();
};

// SHA-256 counter stream keyed by an arbitrary seed.
class SeededRandom final : public RandomSource {
  public:
    explicit SeededRandom(std::span<const uint8_t> seed);
    explicit SeededRandom(uint64_t seed);
    void fill(uint8_t* out, size_t n) override;

  private:
    Bytes seed_;
    uint64_t counter_ = 0;
    Bytes buffer_;
    size_t used_ = 0;
};

}  // namespace loyalty
