#pragma once

#include <gmpxx.h>

#include <array>
#include <optional>

#include "loyalty/bytes.hpp"

namespace loyalty::fp {

// Base field of the pairing curve (381-bit prime). Values are kept
// reduced to [0, p).
struct Fp {
    mpz_class v;

    Fp() : v(0) {}
    explicit Fp(long n);
    explicit Fp(const mpz_class& n);

    static Fp one() { return Fp(1); }
    bool is_zero() const { return v == 0; }
    bool operator==(const Fp& o) const { return v == o.v; }
};

const mpz_class& prime();        // p
const mpz_class& group_order();  // r, prime order of G1/G2/GT

Fp add(const Fp& a, const Fp& b);
Fp sub(const Fp& a, const Fp& b);
Fp neg(const Fp& a);
Fp mul(const Fp& a, const Fp& b);
Fp sqr(const Fp& a);
Fp inv(const Fp& a);  // a != 0
Fp pow(const Fp& a, const mpz_class& e);
std::optional<Fp> sqrt(const Fp& a);
Fp from_bytes_mod_p(std::span<const uint8_t> data);

// 48-byte big-endian encoding.
std::array<uint8_t, 48> fp_to_bytes(const Fp& a);
std::optional<Fp> fp_from_bytes(std::span<const uint8_t> b);  // rejects >= p

// Fp2 = Fp[u] / (u^2 + 1)
struct Fp2 {
    Fp c0, c1;

    Fp2() = default;
    Fp2(Fp a, Fp b) : c0(std::move(a)), c1(std::move(b)) {}
    static Fp2 zero() { return {}; }
    static Fp2 one() { return {Fp(1), Fp(0)}; }

    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool operator==(const Fp2& o) const { return c0 == o.c0 && c1 == o.c1; }
};

Fp2 add(const Fp2& a, const Fp2& b);
Fp2 sub(const Fp2& a, const Fp2& b);
Fp2 neg(const Fp2& a);
Fp2 mul(const Fp2& a, const Fp2& b);
Fp2 mul_fp(const Fp2& a, const Fp& s);
Fp2 sqr(const Fp2& a);
Fp2 inv(const Fp2& a);
Fp2 conj(const Fp2& a);  // c0 - c1 u  (Frobenius x^p)
Fp2 mul_xi(const Fp2& a);  // multiply by xi = 1 + u
Fp2 pow(const Fp2& a, const mpz_class& e);
std::optional<Fp2> sqrt(const Fp2& a);

// Fp6 = Fp2[v] / (v^3 - xi)
struct Fp6 {
    Fp2 c0, c1, c2;

    static Fp6 zero() { return {}; }
    static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
    bool operator==(const Fp6& o) const = default;
};

Fp6 add(const Fp6& a, const Fp6& b);
Fp6 sub(const Fp6& a, const Fp6& b);
Fp6 neg(const Fp6& a);
Fp6 mul(const Fp6& a, const Fp6& b);
Fp6 sqr(const Fp6& a);
Fp6 inv(const Fp6& a);
Fp6 mul_by_v(const Fp6& a);  // (c0,c1,c2) -> (xi*c2, c0, c1)

// Fp12 = Fp6[w] / (w^2 - v)
struct Fp12 {
    Fp6 c0, c1;

    static Fp12 zero() { return {}; }
    static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool is_one() const { return c0 == Fp6::one() && c1.is_zero(); }
    bool operator==(const Fp12& o) const = default;
};

Fp12 add(const Fp12& a, const Fp12& b);
Fp12 sub(const Fp12& a, const Fp12& b);
Fp12 neg(const Fp12& a);
Fp12 mul(const Fp12& a, const Fp12& b);
Fp12 sqr(const Fp12& a);
Fp12 inv(const Fp12& a);
Fp12 conj(const Fp12& a);  // (c0, -c1), equals x^(p^6)
Fp12 pow(const Fp12& a, const mpz_class& e);  // e >= 0
Fp12 frobenius(const Fp12& a);  // x^p

// Curve-family constants shared by the curve and pairing code.
struct CurveConstants {
    mpz_class p;          // base prime
    mpz_class r;          // subgroup order
    mpz_class h1;         // G1 cofactor
    mpz_class h2;         // G2 (twist) cofactor
    mpz_class z_abs;      // |z|, the BLS parameter (z itself is negative)
    mpz_class sqrt_exp;   // (p+1)/4
    Fp2 psi_cx, psi_cy;   // untwist-Frobenius-twist coefficients
    std::array<Fp2, 6> frob_gamma;  // xi^(i(p-1)/6), i = 0..5
    Fp12 w2_inv, w3_inv;  // 1/w^2, 1/w^3 for lifting twist points
};

const CurveConstants& consts();

}  // namespace loyalty::fp
