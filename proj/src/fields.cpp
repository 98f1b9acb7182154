#include "loyalty/fields.hpp"

#include <stdexcept>

namespace loyalty::fp {

namespace {

const char* kP =
    "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f624"
    "1eabfffeb153ffffb9feffffffffaaab";
const char* kR = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";
const char* kH1 = "396c8c005555e1568c00aaab0000aaab";
const char* kH2 =
    "5d543a95414e7f1091d50792876a202cd91de4547085abaa68a205b2e5a7ddfa"
    "628f1cb4d9e82ef21537e293a6691ae1616ec6e786f0c70cf1c38e31c7238e5";
const char* kZAbs = "d201000000010000";

struct Primes {
    mpz_class p, r;
    Primes() : p(kP, 16), r(kR, 16) {}
};

const Primes& primes() {
    static Primes ps;
    return ps;
}

}  // namespace

const mpz_class& prime() { return primes().p; }
const mpz_class& group_order() { return primes().r; }

Fp::Fp(long n) : v(n) {
    if (v < 0) v += prime();
}

Fp::Fp(const mpz_class& n) {
    mpz_mod(v.get_mpz_t(), n.get_mpz_t(), prime().get_mpz_t());
}

Fp add(const Fp& a, const Fp& b) {
    Fp out;
    out.v = a.v + b.v;
    if (out.v >= prime()) out.v -= prime();
    return out;
}

Fp sub(const Fp& a, const Fp& b) {
    Fp out;
    out.v = a.v - b.v;
    if (out.v < 0) out.v += prime();
    return out;
}

Fp neg(const Fp& a) {
    Fp out;
    if (a.v != 0) out.v = prime() - a.v;
    return out;
}

Fp mul(const Fp& a, const Fp& b) {
    Fp out;
    out.v = a.v * b.v;
    mpz_mod(out.v.get_mpz_t(), out.v.get_mpz_t(), prime().get_mpz_t());
    return out;
}

Fp sqr(const Fp& a) { return mul(a, a); }

Fp inv(const Fp& a) {
    if (a.is_zero()) throw std::domain_error("Fp inverse of zero");
    Fp out;
    mpz_invert(out.v.get_mpz_t(), a.v.get_mpz_t(), prime().get_mpz_t());
    return out;
}

Fp pow(const Fp& a, const mpz_class& e) {
    Fp out;
    mpz_powm(out.v.get_mpz_t(), a.v.get_mpz_t(), e.get_mpz_t(), prime().get_mpz_t());
    return out;
}

std::optional<Fp> sqrt(const Fp& a) {
    // p = 3 (mod 4): candidate root a^((p+1)/4)
    Fp c = pow(a, consts().sqrt_exp);
    if (sqr(c) == a) return c;
    return std::nullopt;
}

Fp from_bytes_mod_p(std::span<const uint8_t> data) {
    mpz_class n;
    mpz_import(n.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
    return Fp(n);
}

std::array<uint8_t, 48> fp_to_bytes(const Fp& a) {
    std::array<uint8_t, 48> out{};
    size_t count = 0;
    mpz_export(out.data() + 48 - (mpz_sizeinbase(a.v.get_mpz_t(), 256)), &count, 1, 1, 1, 0,
               a.v.get_mpz_t());
    return out;
}

std::optional<Fp> fp_from_bytes(std::span<const uint8_t> b) {
    if (b.size() != 48) return std::nullopt;
    mpz_class n;
    mpz_import(n.get_mpz_t(), 48, 1, 1, 1, 0, b.data());
    if (n >= prime()) return std::nullopt;
    Fp out;
    out.v = n;
    return out;
}

// ---- Fp2 ----

Fp2 add(const Fp2& a, const Fp2& b) { return {add(a.c0, b.c0), add(a.c1, b.c1)}; }
Fp2 sub(const Fp2& a, const Fp2& b) { return {sub(a.c0, b.c0), sub(a.c1, b.c1)}; }
Fp2 neg(const Fp2& a) { return {neg(a.c0), neg(a.c1)}; }

Fp2 mul(const Fp2& a, const Fp2& b) {
    // Karatsuba with u^2 = -1
    Fp v0 = mul(a.c0, b.c0);
    Fp v1 = mul(a.c1, b.c1);
    Fp s = mul(add(a.c0, a.c1), add(b.c0, b.c1));
    return {sub(v0, v1), sub(sub(s, v0), v1)};
}

Fp2 mul_fp(const Fp2& a, const Fp& s) { return {mul(a.c0, s), mul(a.c1, s)}; }

Fp2 sqr(const Fp2& a) {
    // (c0+c1 u)^2 = (c0+c1)(c0-c1) + 2 c0 c1 u
    Fp t0 = mul(add(a.c0, a.c1), sub(a.c0, a.c1));
    Fp t1 = mul(a.c0, a.c1);
    return {t0, add(t1, t1)};
}

Fp2 inv(const Fp2& a) {
    Fp d = inv(add(sqr(a.c0), sqr(a.c1)));
    return {mul(a.c0, d), neg(mul(a.c1, d))};
}

Fp2 conj(const Fp2& a) { return {a.c0, neg(a.c1)}; }

Fp2 mul_xi(const Fp2& a) {
    // (c0 + c1 u)(1 + u) = (c0 - c1) + (c0 + c1) u
    return {sub(a.c0, a.c1), add(a.c0, a.c1)};
}

Fp2 pow(const Fp2& a, const mpz_class& e) {
    Fp2 out = Fp2::one();
    for (long i = long(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        out = sqr(out);
        if (mpz_tstbit(e.get_mpz_t(), i)) out = mul(out, a);
    }
    return out;
}

std::optional<Fp2> sqrt(const Fp2& a) {
    if (a.is_zero()) return Fp2::zero();
    if (a.c1.is_zero()) {
        // sqrt of c0 in Fp, or of -c0 times u
        if (auto s = sqrt(a.c0)) return Fp2{*s, Fp(0)};
        auto s = sqrt(neg(a.c0));
        if (!s) return std::nullopt;
        return Fp2{Fp(0), *s};
    }
    // norm = c0^2 + c1^2 must be a QR in Fp
    auto lam = sqrt(add(sqr(a.c0), sqr(a.c1)));
    if (!lam) return std::nullopt;
    Fp half = inv(Fp(2));
    for (const Fp& l : {*lam, neg(*lam)}) {
        Fp x0sq = mul(add(a.c0, l), half);
        auto x0 = sqrt(x0sq);
        if (!x0 || x0->is_zero()) continue;
        Fp x1 = mul(a.c1, inv(add(*x0, *x0)));
        Fp2 cand{*x0, x1};
        if (sqr(cand) == a) return cand;
    }
    return std::nullopt;
}

// ---- Fp6 ----

Fp6 add(const Fp6& a, const Fp6& b) { return {add(a.c0, b.c0), add(a.c1, b.c1), add(a.c2, b.c2)}; }
Fp6 sub(const Fp6& a, const Fp6& b) { return {sub(a.c0, b.c0), sub(a.c1, b.c1), sub(a.c2, b.c2)}; }
Fp6 neg(const Fp6& a) { return {neg(a.c0), neg(a.c1), neg(a.c2)}; }

Fp6 mul(const Fp6& a, const Fp6& b) {
    Fp2 v0 = mul(a.c0, b.c0);
    Fp2 v1 = mul(a.c1, b.c1);
    Fp2 v2 = mul(a.c2, b.c2);
    Fp2 t0 = mul(add(a.c1, a.c2), add(b.c1, b.c2));  // v1 + v2 + a1b2 + a2b1
    Fp2 t1 = mul(add(a.c0, a.c1), add(b.c0, b.c1));
    Fp2 t2 = mul(add(a.c0, a.c2), add(b.c0, b.c2));
    Fp2 c0 = add(v0, mul_xi(sub(sub(t0, v1), v2)));
    Fp2 c1 = add(sub(sub(t1, v0), v1), mul_xi(v2));
    Fp2 c2 = add(sub(sub(t2, v0), v2), v1);
    return {c0, c1, c2};
}

Fp6 sqr(const Fp6& a) { return mul(a, a); }

Fp6 inv(const Fp6& a) {
    Fp2 t0 = sub(sqr(a.c0), mul_xi(mul(a.c1, a.c2)));
    Fp2 t1 = sub(mul_xi(sqr(a.c2)), mul(a.c0, a.c1));
    Fp2 t2 = sub(sqr(a.c1), mul(a.c0, a.c2));
    Fp2 d = add(mul(a.c0, t0), mul_xi(add(mul(a.c2, t1), mul(a.c1, t2))));
    Fp2 di = inv(d);
    return {mul(t0, di), mul(t1, di), mul(t2, di)};
}

Fp6 mul_by_v(const Fp6& a) { return {mul_xi(a.c2), a.c0, a.c1}; }

// ---- Fp12 ----

Fp12 add(const Fp12& a, const Fp12& b) { return {add(a.c0, b.c0), add(a.c1, b.c1)}; }
Fp12 sub(const Fp12& a, const Fp12& b) { return {sub(a.c0, b.c0), sub(a.c1, b.c1)}; }
Fp12 neg(const Fp12& a) { return {neg(a.c0), neg(a.c1)}; }

Fp12 mul(const Fp12& a, const Fp12& b) {
    Fp6 v0 = mul(a.c0, b.c0);
    Fp6 v1 = mul(a.c1, b.c1);
    Fp6 s = mul(add(a.c0, a.c1), add(b.c0, b.c1));
    return {add(v0, mul_by_v(v1)), sub(sub(s, v0), v1)};
}

Fp12 sqr(const Fp12& a) {
    // (c0 + c1 w)^2 with w^2 = v
    Fp6 v0 = mul(a.c0, a.c1);
    Fp6 t = mul(add(a.c0, a.c1), add(a.c0, mul_by_v(a.c1)));
    return {sub(sub(t, v0), mul_by_v(v0)), add(v0, v0)};
}

Fp12 inv(const Fp12& a) {
    Fp6 d = sub(sqr(a.c0), mul_by_v(sqr(a.c1)));
    Fp6 di = inv(d);
    return {mul(a.c0, di), neg(mul(a.c1, di))};
}

Fp12 conj(const Fp12& a) { return {a.c0, neg(a.c1)}; }

Fp12 pow(const Fp12& a, const mpz_class& e) {
    if (e < 0) throw std::domain_error("Fp12 pow negative exponent");
    Fp12 out = Fp12::one();
    for (long i = long(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        out = sqr(out);
        if (mpz_tstbit(e.get_mpz_t(), i)) out = mul(out, a);
    }
    return out;
}

Fp12 frobenius(const Fp12& a) {
    // View as sum x_i w^i, x_i in Fp2: x_i -> conj(x_i) * xi^(i(p-1)/6)
    const auto& g = consts().frob_gamma;
    Fp12 out;
    out.c0.c0 = conj(a.c0.c0);
    out.c1.c0 = mul(conj(a.c1.c0), g[1]);
    out.c0.c1 = mul(conj(a.c0.c1), g[2]);
    out.c1.c1 = mul(conj(a.c1.c1), g[3]);
    out.c0.c2 = mul(conj(a.c0.c2), g[4]);
    out.c1.c2 = mul(conj(a.c1.c2), g[5]);
    return out;
}

// ---- constants ----

namespace {

CurveConstants build_constants() {
    CurveConstants c;
    c.p = mpz_class(kP, 16);
    c.r = mpz_class(kR, 16);
    c.h1 = mpz_class(kH1, 16);
    c.h2 = mpz_class(kH2, 16);
    c.z_abs = mpz_class(kZAbs, 16);
    c.sqrt_exp = (c.p + 1) / 4;

    Fp2 xi{Fp(1), Fp(1)};
    mpz_class e6 = (c.p - 1) / 6;
    c.frob_gamma[0] = Fp2::one();
    c.frob_gamma[1] = pow(xi, e6);
    for (int i = 2; i < 6; ++i) c.frob_gamma[i] = mul(c.frob_gamma[i - 1], c.frob_gamma[1]);

    // psi(x, y) = (conj(x) / xi^((p-1)/3), conj(y) / xi^((p-1)/2))
    c.psi_cx = inv(pow(xi, (c.p - 1) / 3));
    c.psi_cy = inv(pow(xi, (c.p - 1) / 2));

    // w^2 = v in Fp12: c0 = (0, 1, 0)
    Fp12 w2;
    w2.c0.c1 = Fp2::one();
    c.w2_inv = inv(w2);
    Fp12 w3;  // w^3 = v w: c1 = (0, 1, 0)
    w3.c1.c1 = Fp2::one();
    c.w3_inv = inv(w3);
    return c;
}

}  // namespace

const CurveConstants& consts() {
    static CurveConstants c = build_constants();
    return c;
}

}  // namespace loyalty::fp
