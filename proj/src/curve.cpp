#include "loyalty/curve.hpp"

#include <stdexcept>

namespace loyalty::ec {

using fp::Fp;
using fp::Fp2;
using fp::Fp12;
using fp::consts;

namespace {

const char* kG1X =
    "17f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac58"
    "6c55e83ff97a1aeffb3af00adb22c6bb";
const char* kG1Y =
    "08b3f481e3aaa0f1a09e30ed741d8ae4fcf5e095d5d00af600db18cb2c04b3ed"
    "d03cc744a2888ae40caa232946c5e7e1";
const char* kG2X0 =
    "024aa2b2f08f0a91260805272dc51051c6e47ad4fa403b02b4510b647ae3d177"
    "0bac0326a805bbefd48056c8c121bdb8";
const char* kG2X1 =
    "13e02b6052719f607dacd3a088274f65596bd0d09920b61ab5da61bbdc7f5049"
    "334cf11213945d57e5ac7d055d042b7e";
const char* kG2Y0 =
    "0ce5d527727d6e118cc9cdc6da2e351aadfd9baa8cbdd3a76d429a695160d12c"
    "923ac9cc3baca289e193548608b82801";
const char* kG2Y1 =
    "0606c4a02ea734cc32acd2b02bc28b99cb3e287e85a763af267492ab572e99ab"
    "3f370d275cec1da1aaa9075ff05f79be";

Fp fp_hex(const char* s) { return Fp(mpz_class(s, 16)); }

template <typename F>
F curve_b();

template <>
Fp curve_b<Fp>() {
    return Fp(4);
}

template <>
Fp2 curve_b<Fp2>() {
    return Fp2{Fp(4), Fp(4)};  // 4(1 + u)
}

template <typename F>
Point<F> generic_dbl(const Point<F>& pt) {
    if (pt.is_infinity()) return pt;
    // dbl-2009-l (a = 0)
    F a = sqr(pt.x);
    F b = sqr(pt.y);
    F c = sqr(b);
    F d = sub(sub(sqr(add(pt.x, b)), a), c);
    d = add(d, d);
    F e = add(add(a, a), a);
    F f = sqr(e);
    Point<F> out;
    out.x = sub(f, add(d, d));
    F c8 = add(c, c);
    c8 = add(c8, c8);
    c8 = add(c8, c8);
    out.y = sub(mul(e, sub(d, out.x)), c8);
    out.z = mul(pt.y, pt.z);
    out.z = add(out.z, out.z);
    return out;
}

template <typename F>
Point<F> generic_add(const Point<F>& p, const Point<F>& q) {
    if (p.is_infinity()) return q;
    if (q.is_infinity()) return p;
    F z1z1 = sqr(p.z);
    F z2z2 = sqr(q.z);
    F u1 = mul(p.x, z2z2);
    F u2 = mul(q.x, z1z1);
    F s1 = mul(mul(p.y, q.z), z2z2);
    F s2 = mul(mul(q.y, p.z), z1z1);
    F h = sub(u2, u1);
    F rr = sub(s2, s1);
    if (h.is_zero()) {
        if (rr.is_zero()) return generic_dbl(p);
        return Point<F>::infinity();
    }
    F i = sqr(add(h, h));
    F j = mul(h, i);
    F r2 = add(rr, rr);
    F v = mul(u1, i);
    Point<F> out;
    out.x = sub(sub(sqr(r2), j), add(v, v));
    F s1j = mul(s1, j);
    out.y = sub(mul(r2, sub(v, out.x)), add(s1j, s1j));
    out.z = mul(mul(p.z, q.z), h);
    out.z = add(out.z, out.z);
    return out;
}

template <typename F>
Point<F> generic_neg(const Point<F>& p) {
    if (p.is_infinity()) return p;
    return {p.x, neg(p.y), p.z};
}

template <typename F>
bool generic_eq(const Point<F>& p, const Point<F>& q) {
    if (p.is_infinity() || q.is_infinity()) return p.is_infinity() == q.is_infinity();
    F z1z1 = sqr(p.z);
    F z2z2 = sqr(q.z);
    if (!(mul(p.x, z2z2) == mul(q.x, z1z1))) return false;
    return mul(mul(p.y, q.z), z2z2) == mul(mul(q.y, p.z), z1z1);
}

template <typename F>
void generic_affine(Point<F>& p) {
    if (p.is_infinity()) {
        p = Point<F>::infinity();
        return;
    }
    F zi = inv(p.z);
    F zi2 = sqr(zi);
    p.x = mul(p.x, zi2);
    p.y = mul(p.y, mul(zi2, zi));
    p.z = F::one();
}

// wNAF-4 digits of |k|, least significant first.
std::vector<int8_t> wnaf4(const mpz_class& k_abs) {
    std::vector<int8_t> digits;
    mpz_class k = k_abs;
    while (k > 0) {
        if (mpz_odd_p(k.get_mpz_t())) {
            long d = long(mpz_fdiv_ui(k.get_mpz_t(), 16));
            if (d >= 8) d -= 16;
            digits.push_back(int8_t(d));
            k -= d;
        } else {
            digits.push_back(0);
        }
        k >>= 1;
    }
    return digits;
}

template <typename F>
Point<F> generic_mul(const Point<F>& p, const mpz_class& k) {
    if (p.is_infinity() || k == 0) return Point<F>::infinity();
    mpz_class k_abs = abs(k);
    // odd multiples P, 3P, 5P, 7P
    std::array<Point<F>, 4> odd;
    odd[0] = p;
    Point<F> two = generic_dbl(p);
    for (int i = 1; i < 4; ++i) odd[i] = generic_add(odd[i - 1], two);
    auto digits = wnaf4(k_abs);
    Point<F> acc = Point<F>::infinity();
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        acc = generic_dbl(acc);
        int8_t d = *it;
        if (d > 0) acc = generic_add(acc, odd[(d - 1) / 2]);
        else if (d < 0) acc = generic_add(acc, generic_neg(odd[(-d - 1) / 2]));
    }
    if (k < 0) acc = generic_neg(acc);
    return acc;
}

template <typename F>
bool generic_on_curve(const Point<F>& p) {
    if (p.is_infinity()) return true;
    Point<F> a = p;
    generic_affine(a);
    F lhs = sqr(a.y);
    F rhs = add(mul(sqr(a.x), a.x), curve_b<F>());
    return lhs == rhs;
}

bool y_sign(const Fp& y) { return y.v > (fp::prime() - 1) / 2; }
bool y_sign(const Fp2& y) { return y.c1.is_zero() ? y_sign(y.c0) : y_sign(y.c1); }

}  // namespace

G1 g1_generator() {
    static G1 g = [] {
        G1 p{fp_hex(kG1X), fp_hex(kG1Y), Fp(1)};
        return p;
    }();
    return g;
}

G2 g2_generator() {
    static G2 g = [] {
        G2 p{Fp2{fp_hex(kG2X0), fp_hex(kG2X1)}, Fp2{fp_hex(kG2Y0), fp_hex(kG2Y1)}, Fp2::one()};
        return p;
    }();
    return g;
}

G1 add(const G1& a, const G1& b) { return generic_add(a, b); }
G1 dbl(const G1& a) { return generic_dbl(a); }
G1 neg(const G1& a) { return generic_neg(a); }
G1 mul(const G1& a, const mpz_class& k) { return generic_mul(a, k); }
bool eq(const G1& a, const G1& b) { return generic_eq(a, b); }
bool on_curve(const G1& a) { return generic_on_curve(a); }
bool in_subgroup(const G1& a) { return mul(a, fp::group_order()).is_infinity(); }

G2 add(const G2& a, const G2& b) { return generic_add(a, b); }
G2 dbl(const G2& a) { return generic_dbl(a); }
G2 neg(const G2& a) { return generic_neg(a); }
G2 mul(const G2& a, const mpz_class& k) { return generic_mul(a, k); }
bool eq(const G2& a, const G2& b) { return generic_eq(a, b); }
bool on_curve(const G2& a) { return generic_on_curve(a); }
bool in_subgroup(const G2& a) { return mul(a, fp::group_order()).is_infinity(); }

void to_affine(G1& a) { generic_affine(a); }
void to_affine(G2& a) { generic_affine(a); }

G2 psi(const G2& a) {
    if (a.is_infinity()) return a;
    G2 t = a;
    generic_affine(t);
    G2 out;
    out.x = mul(consts().psi_cx, conj(t.x));
    out.y = mul(consts().psi_cy, conj(t.y));
    out.z = Fp2::one();
    return out;
}

G2 clear_cofactor(const G2& a) {
    // [z^2 - z - 1]P + [z - 1]psi(P) + psi^2([2]P), z the (negative) curve parameter
    const mpz_class z = -mpz_class(consts().z_abs);
    mpz_class e1 = z * z - z - 1;
    mpz_class e2 = z - 1;
    G2 t1 = mul(a, e1);
    G2 t2 = mul(psi(a), e2);
    G2 t3 = psi(psi(dbl(a)));
    return add(add(t1, t2), t3);
}

// ---- serialization ----

std::array<uint8_t, 48> serialize(const G1& a) {
    std::array<uint8_t, 48> out{};
    if (a.is_infinity()) {
        out[0] = 0xc0;
        return out;
    }
    G1 t = a;
    to_affine(t);
    out = fp::fp_to_bytes(t.x);
    out[0] |= 0x80;
    if (y_sign(t.y)) out[0] |= 0x20;
    return out;
}

std::array<uint8_t, 96> serialize(const G2& a) {
    std::array<uint8_t, 96> out{};
    if (a.is_infinity()) {
        out[0] = 0xc0;
        return out;
    }
    G2 t = a;
    to_affine(t);
    auto c1 = fp::fp_to_bytes(t.x.c1);
    auto c0 = fp::fp_to_bytes(t.x.c0);
    std::copy(c1.begin(), c1.end(), out.begin());
    std::copy(c0.begin(), c0.end(), out.begin() + 48);
    out[0] |= 0x80;
    if (y_sign(t.y)) out[0] |= 0x20;
    return out;
}

std::optional<G1> deserialize_g1(std::span<const uint8_t> b) {
    if (b.size() != 48) return std::nullopt;
    uint8_t flags = b[0];
    if (!(flags & 0x80)) return std::nullopt;
    std::array<uint8_t, 48> raw{};
    std::copy(b.begin(), b.end(), raw.begin());
    raw[0] &= 0x1f;
    if (flags & 0x40) {
        if (flags & 0x20) return std::nullopt;
        for (uint8_t byte : raw)
            if (byte != 0) return std::nullopt;
        return G1::infinity();
    }
    auto x = fp::fp_from_bytes(raw);
    if (!x) return std::nullopt;
    auto y = fp::sqrt(add(mul(sqr(*x), *x), curve_b<Fp>()));
    if (!y) return std::nullopt;
    if (y_sign(*y) != bool(flags & 0x20)) *y = neg(*y);
    G1 p{*x, *y, Fp(1)};
    if (!in_subgroup(p)) return std::nullopt;
    return p;
}

std::optional<G2> deserialize_g2(std::span<const uint8_t> b) {
    if (b.size() != 96) return std::nullopt;
    uint8_t flags = b[0];
    if (!(flags & 0x80)) return std::nullopt;
    std::array<uint8_t, 48> hi{}, lo{};
    std::copy(b.begin(), b.begin() + 48, hi.begin());
    std::copy(b.begin() + 48, b.end(), lo.begin());
    hi[0] &= 0x1f;
    if (flags & 0x40) {
        if (flags & 0x20) return std::nullopt;
        for (int i = 0; i < 48; ++i)
            if (hi[i] != 0 || lo[i] != 0) return std::nullopt;
        return G2::infinity();
    }
    auto c1 = fp::fp_from_bytes(hi);
    auto c0 = fp::fp_from_bytes(lo);
    if (!c0 || !c1) return std::nullopt;
    Fp2 x{*c0, *c1};
    auto y = fp::sqrt(add(mul(sqr(x), x), curve_b<Fp2>()));
    if (!y) return std::nullopt;
    if (y_sign(*y) != bool(flags & 0x20)) *y = neg(*y);
    G2 p{x, *y, Fp2::one()};
    if (!in_subgroup(p)) return std::nullopt;
    return p;
}

Gt gt_mul(const Gt& a, const Gt& b) { return {mul(a.v, b.v)}; }

Gt gt_pow(const Gt& a, const mpz_class& e) {
    mpz_class k;
    mpz_mod(k.get_mpz_t(), e.get_mpz_t(), fp::group_order().get_mpz_t());
    return {pow(a.v, k)};
}

std::array<uint8_t, 576> serialize(const Gt& a) {
    std::array<uint8_t, 576> out{};
    const Fp* coeffs[12] = {
        &a.v.c0.c0.c0, &a.v.c0.c0.c1, &a.v.c0.c1.c0, &a.v.c0.c1.c1,
        &a.v.c0.c2.c0, &a.v.c0.c2.c1, &a.v.c1.c0.c0, &a.v.c1.c0.c1,
        &a.v.c1.c1.c0, &a.v.c1.c1.c1, &a.v.c1.c2.c0, &a.v.c1.c2.c1,
    };
    for (int i = 0; i < 12; ++i) {
        auto b = fp::fp_to_bytes(*coeffs[i]);
        std::copy(b.begin(), b.end(), out.begin() + 48 * i);
    }
    return out;
}

std::optional<Gt> deserialize_gt(std::span<const uint8_t> b) {
    if (b.size() != 576) return std::nullopt;
    Gt out;
    Fp* coeffs[12] = {
        &out.v.c0.c0.c0, &out.v.c0.c0.c1, &out.v.c0.c1.c0, &out.v.c0.c1.c1,
        &out.v.c0.c2.c0, &out.v.c0.c2.c1, &out.v.c1.c0.c0, &out.v.c1.c0.c1,
        &out.v.c1.c1.c0, &out.v.c1.c1.c1, &out.v.c1.c2.c0, &out.v.c1.c2.c1,
    };
    for (int i = 0; i < 12; ++i) {
        auto f = fp::fp_from_bytes(b.subspan(48 * i, 48));
        if (!f) return std::nullopt;
        *coeffs[i] = *f;
    }
    if (!(pow(out.v, fp::group_order()) == Fp12::one())) return std::nullopt;
    return out;
}

// ---- pairing ----

namespace {

// Lift Fp2 values on the twist to E(Fp12) coordinates.
Fp12 embed_fp2(const Fp2& a) {
    Fp12 out;
    out.c0.c0 = a;
    return out;
}

Fp12 embed_fp(const Fp& a) {
    Fp12 out;
    out.c0.c0.c0 = a;
    return out;
}

struct LiftedG2 {
    Fp12 x, y;
};

LiftedG2 lift(const G2& q) {
    G2 a = q;
    to_affine(a);
    return {mul(embed_fp2(a.x), consts().w2_inv), mul(embed_fp2(a.y), consts().w3_inv)};
}

// Miller loop over the bits of |z|, collecting line evaluations. When
// `collect` is set, line coefficients are also recorded for reuse.
Fp12 miller_loop(const G1& p_in, const G2& q_in, PreparedG2* collect) {
    G1 pa = p_in;
    to_affine(pa);
    Fp12 xp = embed_fp(pa.x);
    Fp12 yp = embed_fp(pa.y);
    LiftedG2 q = lift(q_in);

    Fp12 f = Fp12::one();
    Fp12 tx = q.x, ty = q.y;

    auto line_eval = [&](const Fp12& lambda, const Fp12& lx, const Fp12& ly) {
        // l(P) = (yP - ly) - lambda (xP - lx)
        Fp12 val = sub(sub(yp, ly), mul(lambda, sub(xp, lx)));
        if (collect)
            collect->lines.push_back({lambda, sub(mul(lambda, lx), ly), false});
        return val;
    };

    const mpz_class& n = consts().z_abs;
    long top = long(mpz_sizeinbase(n.get_mpz_t(), 2)) - 1;
    for (long i = top - 1; i >= 0; --i) {
        // tangent line at T
        Fp12 lambda = mul(mul(sqr(tx), embed_fp(Fp(3))), inv(add(ty, ty)));
        Fp12 l = line_eval(lambda, tx, ty);
        if (collect) collect->lines.back().is_double = true;
        f = mul(sqr(f), l);
        // T = 2T
        Fp12 nx = sub(sqr(lambda), add(tx, tx));
        ty = sub(mul(lambda, sub(tx, nx)), ty);
        tx = nx;
        if (mpz_tstbit(n.get_mpz_t(), i)) {
            // chord through T and Q
            Fp12 lambda2 = mul(sub(q.y, ty), inv(sub(q.x, tx)));
            Fp12 l2 = line_eval(lambda2, tx, ty);
            f = mul(f, l2);
            Fp12 nx2 = sub(sub(sqr(lambda2), tx), q.x);
            ty = sub(mul(lambda2, sub(tx, nx2)), ty);
            tx = nx2;
        }
    }
    // z < 0: conjugate (inverts the result up to final exponentiation)
    return conj(f);
}

Fp12 pow_zabs(const Fp12& a) {
    const mpz_class& n = consts().z_abs;
    Fp12 out = a;
    for (long i = long(mpz_sizeinbase(n.get_mpz_t(), 2)) - 2; i >= 0; --i) {
        out = sqr(out);
        if (mpz_tstbit(n.get_mpz_t(), i)) out = mul(out, a);
    }
    return out;
}

// x^z for unitary x (z negative: conjugate of x^|z|)
Fp12 pow_z(const Fp12& a) { return conj(pow_zabs(a)); }

// x^(z-1) = x^z * x^(-1) for unitary x
Fp12 pow_z_minus_1(const Fp12& a) { return mul(pow_z(a), conj(a)); }

Fp12 final_exponentiation(const Fp12& f) {
    // easy part: f^((p^6 - 1)(p^2 + 1))
    Fp12 m = mul(conj(f), inv(f));
    m = mul(frobenius(frobenius(m)), m);
    // hard part: exponent (z-1)^2 (z+p)(z^2+p^2-1) + 3, which equals
    // 3 (p^4 - p^2 + 1)/r. m is unitary here, so conj == inverse.
    Fp12 t = pow_z_minus_1(pow_z_minus_1(m));
    t = mul(pow_z(t), frobenius(t));                       // ^(z+p)
    Fp12 a = pow_z(pow_z(t));                              // ^(z^2)
    Fp12 b = frobenius(frobenius(t));                      // ^(p^2)
    Fp12 res = mul(mul(a, b), conj(t));                    // ^(z^2+p^2-1)
    Fp12 m3 = mul(sqr(m), m);
    return mul(res, m3);
}

}  // namespace

Gt pair(const G1& p, const G2& q) {
    if (p.is_infinity() || q.is_infinity()) return Gt{Fp12::one()};
    return Gt{final_exponentiation(miller_loop(p, q, nullptr))};
}

PreparedG2 prepare(const G2& q) {
    PreparedG2 prep;
    if (q.is_infinity()) {
        prep.infinity = true;
        return prep;
    }
    miller_loop(g1_generator(), q, &prep);
    return prep;
}

Gt pair_prepared(const G1& p, const PreparedG2& prep) {
    if (prep.infinity || p.is_infinity()) return Gt{Fp12::one()};
    G1 pa = p;
    to_affine(pa);
    Fp12 xp = embed_fp(pa.x);
    Fp12 yp = embed_fp(pa.y);
    Fp12 f = Fp12::one();
    for (const auto& ln : prep.lines) {
        Fp12 l = add(sub(yp, mul(ln.lambda, xp)), ln.offset);
        if (ln.is_double) f = mul(sqr(f), l);
        else f = mul(f, l);
    }
    return Gt{final_exponentiation(conj(f))};
}

G1FixedBase::G1FixedBase(const G1& base) {
    size_t windows = (mpz_sizeinbase(fp::group_order().get_mpz_t(), 2) + 3) / 4;
    table_.resize(windows);
    G1 step = base;  // 16^i * base
    for (size_t i = 0; i < windows; ++i) {
        G1 acc = step;
        for (int d = 1; d <= 15; ++d) {
            table_[i][d - 1] = acc;
            acc = generic_add(acc, step);
        }
        step = acc;  // 16 * step
    }
}

G1 G1FixedBase::mul(const mpz_class& k) const {
    mpz_class n;
    mpz_mod(n.get_mpz_t(), k.get_mpz_t(), fp::group_order().get_mpz_t());
    G1 acc = G1::infinity();
    size_t i = 0;
    while (n > 0 && i < table_.size()) {
        long d = long(mpz_fdiv_ui(n.get_mpz_t(), 16));
        if (d != 0) acc = generic_add(acc, table_[i][d - 1]);
        n >>= 4;
        ++i;
    }
    return acc;
}

}  // namespace loyalty::ec
