#include "loyalty/crypto_core.hpp"

#include "loyalty/sha.hpp"

namespace loyalty::core {

const mpz_class& order() { return fp::group_order(); }

Scalar::Scalar(long n) : v(n) {
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), order().get_mpz_t());
}

Scalar::Scalar(const mpz_class& n) {
    mpz_mod(v.get_mpz_t(), n.get_mpz_t(), order().get_mpz_t());
}

Scalar sc_add(const Scalar& a, const Scalar& b) {
    Scalar out;
    out.v = a.v + b.v;
    if (out.v >= order()) out.v -= order();
    return out;
}

Scalar sc_sub(const Scalar& a, const Scalar& b) {
    Scalar out;
    out.v = a.v - b.v;
    if (out.v < 0) out.v += order();
    return out;
}

Scalar sc_mul(const Scalar& a, const Scalar& b) {
    Scalar out;
    out.v = a.v * b.v;
    mpz_mod(out.v.get_mpz_t(), out.v.get_mpz_t(), order().get_mpz_t());
    return out;
}

Scalar sc_neg(const Scalar& a) {
    Scalar out;
    if (a.v != 0) out.v = order() - a.v;
    return out;
}

Scalar sc_inv(const Scalar& a) {
    if (a.is_zero()) throw std::domain_error("scalar inverse of zero");
    Scalar out;
    mpz_invert(out.v.get_mpz_t(), a.v.get_mpz_t(), order().get_mpz_t());
    return out;
}

Scalar random_scalar(RandomSource& rng) {
    // 64 uniform bytes reduced mod (q-1), then +1: uniform over [1, q-1]
    // up to a negligible bias.
    uint8_t buf[64];
    rng.fill(buf, sizeof buf);
    mpz_class n;
    mpz_import(n.get_mpz_t(), sizeof buf, 1, 1, 1, 0, buf);
    mpz_class qm1 = order() - 1;
    mpz_mod(n.get_mpz_t(), n.get_mpz_t(), qm1.get_mpz_t());
    Scalar out;
    out.v = n + 1;
    return out;
}

std::array<uint8_t, 32> scalar_to_bytes(const Scalar& a) {
    std::array<uint8_t, 32> out{};
    if (a.v != 0)
        mpz_export(out.data() + 32 - mpz_sizeinbase(a.v.get_mpz_t(), 256), nullptr, 1, 1, 1, 0,
                   a.v.get_mpz_t());
    return out;
}

std::optional<Scalar> scalar_from_bytes(std::span<const uint8_t> b) {
    if (b.size() != 32) return std::nullopt;
    mpz_class n;
    mpz_import(n.get_mpz_t(), 32, 1, 1, 1, 0, b.data());
    if (n >= order()) return std::nullopt;
    Scalar out;
    out.v = n;
    return out;
}

Bytes encode_preimage(const std::string& c, const Message& m) {
    if (c.size() > 0xffffffffull) throw std::length_error("public info too long");
    Bytes out;
    out.reserve(68 + c.size());
    append_u32be(out, uint32_t(c.size()));
    append(out, c);
    auto a = scalar_to_bytes(m.alpha);
    auto y = scalar_to_bytes(m.y);
    append(out, std::span<const uint8_t>(a));
    append(out, std::span<const uint8_t>(y));
    return out;
}

Bytes scalar_hash_preimage(std::span<const uint8_t> data) {
    Bytes out{0x01};
    append(out, data);
    return out;
}

Bytes group_hash_preimage(std::span<const uint8_t> data, uint8_t counter, uint8_t part) {
    Bytes out{0x02};
    append(out, data);
    append_u8(out, counter);
    append_u8(out, part);
    return out;
}

Scalar hash_to_scalar(std::span<const uint8_t> data) {
    auto d = sha512(scalar_hash_preimage(data));
    mpz_class n;
    mpz_import(n.get_mpz_t(), d.size(), 1, 1, 1, 0, d.data());
    mpz_class qm1 = order() - 1;
    mpz_mod(n.get_mpz_t(), n.get_mpz_t(), qm1.get_mpz_t());
    Scalar out;
    out.v = n + 1;
    return out;
}

Scalar hash_to_scalar(const std::string& data) {
    return hash_to_scalar(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()),
                                                   data.size()));
}

ec::G2 hash_to_group(std::span<const uint8_t> data) {
    using namespace fp;
    for (unsigned ctr = 0; ctr < 256; ++ctr) {
        auto d0 = sha512(group_hash_preimage(data, uint8_t(ctr), 0));
        auto d1 = sha512(group_hash_preimage(data, uint8_t(ctr), 1));
        Fp2 x{from_bytes_mod_p(d0), from_bytes_mod_p(d1)};
        Fp2 rhs = add(mul(sqr(x), x), Fp2{Fp(4), Fp(4)});
        auto y = sqrt(rhs);
        if (!y) continue;
        // canonical root: the one whose encoding carries a clear sign bit
        ec::G2 pt{x, *y, Fp2::one()};
        auto enc = ec::serialize(pt);
        if (enc[0] & 0x20) pt.y = neg(pt.y);
        ec::G2 out = ec::clear_cofactor(pt);
        if (!out.is_infinity()) return out;
    }
    throw std::runtime_error("hash_to_group failed to find a point");
}

// ---- SystemParams ----

namespace {
constexpr uint8_t kVersion = 1;
constexpr uint8_t kCurveBls12_381 = 1;
constexpr uint8_t kHashScalarSha512 = 1;
constexpr uint8_t kHashGroupSha512Ti = 1;
}  // namespace

Bytes SystemParams::serialize() const {
    Bytes out;
    append_u8(out, kVersion);
    append_u8(out, kCurveBls12_381);
    append_u32be(out, lambda);
    std::array<uint8_t, 32> qbytes{};
    mpz_export(qbytes.data() + 32 - mpz_sizeinbase(q.get_mpz_t(), 256), nullptr, 1, 1, 1, 0,
               q.get_mpz_t());
    append(out, std::span<const uint8_t>(qbytes));
    auto gb = ec::serialize(g);
    auto hb = ec::serialize(h);
    append(out, std::span<const uint8_t>(gb));
    append(out, std::span<const uint8_t>(hb));
    append_u8(out, kHashScalarSha512);
    append_u8(out, kHashGroupSha512Ti);
    return out;
}

SystemParams parse_params(std::span<const uint8_t> data) {
    if (data.size() != 1 + 1 + 4 + 32 + 48 + 96 + 2) throw std::invalid_argument("params: bad length");
    size_t off = 0;
    if (data[off++] != kVersion) throw std::invalid_argument("params: unknown version");
    if (data[off++] != kCurveBls12_381) throw std::invalid_argument("params: unknown curve");
    uint32_t lambda = read_u32be(data.subspan(off, 4));
    off += 4;
    mpz_class q;
    mpz_import(q.get_mpz_t(), 32, 1, 1, 1, 0, data.data() + off);
    off += 32;
    if (q != order()) throw std::invalid_argument("params: order mismatch");
    auto g = ec::deserialize_g1(data.subspan(off, 48));
    off += 48;
    auto h = ec::deserialize_g2(data.subspan(off, 96));
    off += 96;
    if (!g || !h) throw std::invalid_argument("params: bad generator");
    if (data[off] != kHashScalarSha512 || data[off + 1] != kHashGroupSha512Ti)
        throw std::invalid_argument("params: unknown hash ids");
    SystemParams p = setup(lambda);
    if (!ec::eq(*g, p.g) || !ec::eq(*h, p.h)) throw std::invalid_argument("params: generator mismatch");
    return p;
}

SystemParams SystemParams::parse(std::span<const uint8_t> data) { return parse_params(data); }

SystemParams setup(unsigned lambda) {
    if (lambda != 128) throw UnsupportedSecurityLevel("unsupported security level");
    SystemParams p;
    p.lambda = lambda;
    p.curve = "BLS12-381";
    p.hash_scalar = "SHA-512/d01";
    p.hash_group = "SHA-512/d02-ti";
    p.q = order();
    p.g = ec::g1_generator();
    p.h = ec::g2_generator();
    return p;
}

}  // namespace loyalty::core
