#include "loyalty/rng.hpp"

#include <sys/random.h>

#include <cstring>
#include <stdexcept>

#include "loyalty/sha.hpp"

namespace loyalty {

void SystemRandom::fill(uint8_t* out, size_t n) {
    size_t off = 0;
    while (off < n) {
        ssize_t got = getrandom(out + off, n - off, 0);
        if (got < 0) throw std::runtime_error("getrandom failed");
        off += size_t(got);
    }
}

SystemRandom& SystemRandom::instance() {
    static SystemRandom rng;
    return rng;
}

SeededRandom::SeededRandom(std::span<const uint8_t> seed) : seed_(seed.begin(), seed.end()) {}

SeededRandom::SeededRandom(uint64_t seed) {
    append_u64be(seed_, seed);
}

void SeededRandom::fill(uint8_t* out, size_t n) {
    size_t off = 0;
    while (off < n) {
        if (used_ == buffer_.size()) {
            Bytes block = seed_;
            append_u64be(block, counter_++);
            auto d = sha256(block);
            buffer_.assign(d.begin(), d.end());
            used_ = 0;
        }
        size_t take = std::min(n - off, buffer_.size() - used_);
        std::memcpy(out + off, buffer_.data() + used_, take);
        off += take;
        used_ += take;
    }
}

}  // namespace loyalty
