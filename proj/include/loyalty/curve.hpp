#pragma once

#include <optional>
#include <vector>

#include "loyalty/fields.hpp"

namespace loyalty::ec {

// Jacobian point on y^2 = x^3 + b over field F (b = 4 for G1, 4(1+u) for
// the G2 twist). z == 0 encodes the point at infinity.
template <typename F>
struct Point {
    F x, y, z;

    bool is_infinity() const { return z.is_zero(); }
    static Point infinity() { return Point{}; }
};

using G1 = Point<fp::Fp>;
using G2 = Point<fp::Fp2>;

G1 g1_generator();
G2 g2_generator();

G1 add(const G1& a, const G1& b);
G1 dbl(const G1& a);
G1 neg(const G1& a);
G1 mul(const G1& a, const mpz_class& k);
bool eq(const G1& a, const G1& b);
bool on_curve(const G1& a);
bool in_subgroup(const G1& a);

G2 add(const G2& a, const G2& b);
G2 dbl(const G2& a);
G2 neg(const G2& a);
G2 mul(const G2& a, const mpz_class& k);
bool eq(const G2& a, const G2& b);
bool on_curve(const G2& a);
bool in_subgroup(const G2& a);

void to_affine(G1& a);
void to_affine(G2& a);

// Untwist-Frobenius-twist endomorphism; acts as [p] on the r-torsion.
G2 psi(const G2& a);
// Maps an arbitrary twist point into the order-r subgroup.
G2 clear_cofactor(const G2& a);

// Compressed encodings: 48 bytes (G1) / 96 bytes (G2), flag bits in the
// top byte of x: bit7 compressed, bit6 infinity, bit5 sign of y.
std::array<uint8_t, 48> serialize(const G1& a);
std::array<uint8_t, 96> serialize(const G2& a);
// Reject off-curve and out-of-subgroup encodings.
std::optional<G1> deserialize_g1(std::span<const uint8_t> b);
std::optional<G2> deserialize_g2(std::span<const uint8_t> b);

// Target group element (unique value of the reduced pairing).
struct Gt {
    fp::Fp12 v;

    bool operator==(const Gt& o) const { return v == o.v; }
    bool is_identity() const { return v.is_one(); }
};

Gt gt_mul(const Gt& a, const Gt& b);
Gt gt_pow(const Gt& a, const mpz_class& e);  // e taken mod r
std::array<uint8_t, 576> serialize(const Gt& a);
std::optional<Gt> deserialize_gt(std::span<const uint8_t> b);

// Reduced optimal ate pairing (a fixed third power of the standard ate
// value, which preserves bilinearity and non-degeneracy).
Gt pair(const G1& p, const G2& q);

// Line coefficients of a Miller loop run with a fixed G2 argument;
// makes repeated pairings against that argument cheaper.
struct PreparedG2 {
    struct Line {
        fp::Fp12 lambda;  // slope, lifted
        fp::Fp12 offset;  // lambda*xT - yT, lifted
        bool is_double;
    };
    std::vector<Line> lines;
    bool infinity = false;
};

PreparedG2 prepare(const G2& q);
Gt pair_prepared(const G1& p, const PreparedG2& prep);

// Fixed-base exponentiation table for a G1 base point.
struct G1FixedBase {
    explicit G1FixedBase(const G1& base);
    G1 mul(const mpz_class& k) const;  // k in [0, r)

  private:
    std::vector<std::array<G1, 15>> table_;  // radix-16 digits
};

}  // namespace loyalty::ec
