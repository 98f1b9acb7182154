#pragma once

#include <stdexcept>
#include <string>

#include "loyalty/curve.hpp"
#include "loyalty/rng.hpp"

namespace loyalty::core {

// Element of Z_q, q the prime order of the pairing groups. Protocol
// values are always in [1, q-1]; zero is representable but never valid
// on the wire.
struct Scalar {
    mpz_class v;

    Scalar() : v(0) {}
    explicit Scalar(long n);
    explicit Scalar(const mpz_class& n);

    bool is_zero() const { return v == 0; }
    bool operator==(const Scalar& o) const { return v == o.v; }
};

const mpz_class& order();  // q

Scalar sc_add(const Scalar& a, const Scalar& b);
Scalar sc_sub(const Scalar& a, const Scalar& b);
Scalar sc_mul(const Scalar& a, const Scalar& b);
Scalar sc_neg(const Scalar& a);
Scalar sc_inv(const Scalar& a);  // a != 0

// Uniform in [1, q-1].
Scalar random_scalar(RandomSource& rng);

// 32-byte big-endian encoding.
std::array<uint8_t, 32> scalar_to_bytes(const Scalar& a);
std::optional<Scalar> scalar_from_bytes(std::span<const uint8_t> b);  // rejects >= q

// Secret message bound into a token: unique identifier alpha plus the
// customer-chosen linkability identifier y.
struct Message {
    Scalar alpha;
    Scalar y;

    bool operator==(const Message& o) const { return alpha == o.alpha && y == o.y; }
};

// Injective preimage for H0: len(c) (4 bytes BE) || c || alpha || y.
Bytes encode_preimage(const std::string& c, const Message& m);

// H: arbitrary bytes -> [1, q-1]. Domain byte 0x01.
Scalar hash_to_scalar(std::span<const uint8_t> data);
Scalar hash_to_scalar(const std::string& data);

// H0: arbitrary bytes -> G2 \ {identity}. Domain byte 0x02. Deterministic
// try-and-increment onto the twist followed by cofactor clearing.
ec::G2 hash_to_group(std::span<const uint8_t> data);

// Exact prefixed byte strings the hashes consume; lets tests audit the
// domain separation between H and H0.
Bytes scalar_hash_preimage(std::span<const uint8_t> data);
Bytes group_hash_preimage(std::span<const uint8_t> data, uint8_t counter, uint8_t part);

struct UnsupportedSecurityLevel : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SystemParams {
    unsigned lambda = 0;
    std::string curve;        // "BLS12-381"
    std::string hash_scalar;  // "SHA-512/d01"
    std::string hash_group;   // "SHA-512/d02-ti"
    mpz_class q;
    ec::G1 g;
    ec::G2 h;

    Bytes serialize() const;
    static SystemParams parse(std::span<const uint8_t> data);  // throws on malformed
};

// Single supported level: 128.
SystemParams setup(unsigned lambda);

}  // namespace loyalty::core
