#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loyalty/crypto_core.hpp"
#include "loyalty/sha.hpp"

using namespace loyalty;
using namespace loyalty::core;

namespace {
Bytes str_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }
}

TEST_CASE("curve family identities hold (independent big-integer check)") {
    const auto& c = fp::consts();
    mpz_class z = -mpz_class(c.z_abs);
    CHECK(c.r == z * z * z * z - z * z + 1);
    CHECK(c.p == (z - 1) * (z - 1) * c.r / 3 + z);
    CHECK(c.h1 == (z - 1) * (z - 1) / 3);
    // q prime and q > 2^lambda
    CHECK(mpz_probab_prime_p(c.r.get_mpz_t(), 40) != 0);
    CHECK(mpz_probab_prime_p(c.p.get_mpz_t(), 40) != 0);
    mpz_class two128 = mpz_class(1) << 128;
    CHECK(c.r > two128);
    CHECK(mpz_sizeinbase(c.r.get_mpz_t(), 2) == 255);
    // final exponentiation chain: (z-1)^2 (z+p)(z^2+p^2-1) + 3 == 3 (p^4-p^2+1)/r
    mpz_class hard = (c.p * c.p * c.p * c.p - c.p * c.p + 1) / c.r;
    mpz_class chain = (z - 1) * (z - 1) * (z + c.p) * (z * z + c.p * c.p - 1) + 3;
    CHECK(chain == 3 * hard);
}

TEST_CASE("base field arithmetic") {
    SeededRandom rng(1);
    for (int i = 0; i < 200; ++i) {
        auto b = rng.bytes(48);
        fp::Fp a = fp::from_bytes_mod_p(b);
        if (a.is_zero()) continue;
        CHECK(fp::mul(a, fp::inv(a)) == fp::Fp(1));
        fp::Fp s = fp::sqr(a);
        auto rt = fp::sqrt(s);
        REQUIRE(rt.has_value());
        CHECK((rt->v == a.v || rt->v == fp::neg(a).v));
    }
}

TEST_CASE("extension towers invert and embed correctly") {
    SeededRandom rng(2);
    auto rand_fp = [&] { return fp::from_bytes_mod_p(rng.bytes(48)); };
    for (int i = 0; i < 50; ++i) {
        fp::Fp2 a{rand_fp(), rand_fp()};
        CHECK(fp::mul(a, fp::inv(a)) == fp::Fp2::one());
        fp::Fp2 s = fp::sqr(a);
        auto rt = fp::sqrt(s);
        REQUIRE(rt.has_value());
        CHECK((fp::sqr(*rt) == s));
        fp::Fp6 b{a, fp::Fp2{rand_fp(), rand_fp()}, fp::Fp2{rand_fp(), rand_fp()}};
        CHECK(fp::mul(b, fp::inv(b)) == fp::Fp6::one());
        fp::Fp12 d{b, fp::Fp6{fp::Fp2{rand_fp(), rand_fp()}, fp::Fp2{rand_fp(), rand_fp()},
                              fp::Fp2{rand_fp(), rand_fp()}}};
        CHECK(fp::mul(d, fp::inv(d)) == fp::Fp12::one());
        // Frobenius is the p-power map
        CHECK(fp::frobenius(d) == fp::pow(d, fp::prime()));
    }
}

TEST_CASE("generators are valid points of order q") {
    auto g = ec::g1_generator();
    auto h = ec::g2_generator();
    CHECK(ec::on_curve(g));
    CHECK(ec::on_curve(h));
    CHECK(ec::in_subgroup(g));
    CHECK(ec::in_subgroup(h));
    CHECK_FALSE(g.is_infinity());
    CHECK_FALSE(h.is_infinity());
}

TEST_CASE("group exponent laws") {
    SeededRandom rng(3);
    const mpz_class& q = order();
    for (int i = 0; i < 20; ++i) {
        Scalar s = random_scalar(rng), t = random_scalar(rng);
        mpz_class st = (s.v * t.v) % q;
        auto g = ec::g1_generator();
        CHECK(ec::eq(ec::mul(ec::mul(g, s.v), t.v), ec::mul(g, st)));
        auto h = ec::g2_generator();
        CHECK(ec::eq(ec::mul(ec::mul(h, s.v), t.v), ec::mul(h, st)));
    }
    // inverse law on scalars
    for (int i = 0; i < 1000; ++i) {
        Scalar s = random_scalar(rng);
        CHECK(sc_mul(s, sc_inv(s)) == Scalar(1));
    }
}

TEST_CASE("psi acts as multiplication by p on the subgroup") {
    auto h = ec::g2_generator();
    mpz_class p_mod_r;
    mpz_mod(p_mod_r.get_mpz_t(), fp::prime().get_mpz_t(), order().get_mpz_t());
    CHECK(ec::eq(ec::psi(h), ec::mul(h, p_mod_r)));
    SeededRandom rng(4);
    Scalar k = random_scalar(rng);
    auto pt = ec::mul(h, k.v);
    CHECK(ec::eq(ec::psi(pt), ec::mul(pt, p_mod_r)));
}

TEST_CASE("pairing is bilinear and non-degenerate") {
    auto g = ec::g1_generator();
    auto h = ec::g2_generator();
    auto e_gh = ec::pair(g, h);
    CHECK_FALSE(e_gh.is_identity());
    CHECK(ec::pair(ec::mul(g, 2), h) == ec::pair(g, ec::mul(h, 2)));
    // e(g^a, h^b) == e(g,h)^(ab) for a=3, b=5
    CHECK(ec::pair(ec::mul(g, 3), ec::mul(h, 5)) == ec::gt_pow(e_gh, 15));
    SeededRandom rng(5);
    Scalar a = random_scalar(rng), b = random_scalar(rng);
    mpz_class ab = (a.v * b.v) % order();
    CHECK(ec::pair(ec::mul(g, a.v), ec::mul(h, b.v)) == ec::gt_pow(e_gh, ab));
    // pairing output lives in the order-q subgroup of Fp12
    CHECK(ec::gt_pow(e_gh, order()).is_identity());
}

TEST_CASE("prepared pairing matches the direct pairing") {
    SeededRandom rng(6);
    auto g = ec::g1_generator();
    auto h = ec::g2_generator();
    auto q = ec::mul(h, random_scalar(rng).v);
    auto prep = ec::prepare(q);
    for (int i = 0; i < 5; ++i) {
        auto p = ec::mul(g, random_scalar(rng).v);
        CHECK(ec::pair(p, q) == ec::pair_prepared(p, prep));
    }
}

TEST_CASE("point serialization round-trips and rejects bad encodings") {
    SeededRandom rng(7);
    for (int i = 0; i < 500; ++i) {
        auto p = ec::mul(ec::g1_generator(), random_scalar(rng).v);
        auto enc = ec::serialize(p);
        auto back = ec::deserialize_g1(enc);
        REQUIRE(back.has_value());
        CHECK(ec::eq(*back, p));
        auto q = ec::mul(ec::g2_generator(), random_scalar(rng).v);
        auto enc2 = ec::serialize(q);
        auto back2 = ec::deserialize_g2(enc2);
        REQUIRE(back2.has_value());
        CHECK(ec::eq(*back2, q));
    }
    // infinity round-trip
    auto inf1 = ec::serialize(ec::G1::infinity());
    CHECK(ec::deserialize_g1(inf1)->is_infinity());
    auto inf2 = ec::serialize(ec::G2::infinity());
    CHECK(ec::deserialize_g2(inf2)->is_infinity());
    // uncompressed flag missing
    auto enc = ec::serialize(ec::g1_generator());
    enc[0] &= 0x7f;
    CHECK_FALSE(ec::deserialize_g1(enc).has_value());
    // x = p (out of range)
    std::array<uint8_t, 48> bad{};
    auto pbytes = fp::fp_to_bytes(fp::Fp(0));
    (void)pbytes;
    mpz_class pv = fp::prime();
    mpz_export(bad.data() + 48 - mpz_sizeinbase(pv.get_mpz_t(), 256), nullptr, 1, 1, 1, 0,
               pv.get_mpz_t());
    bad[0] |= 0x80;
    CHECK_FALSE(ec::deserialize_g1(bad).has_value());
}

TEST_CASE("off-subgroup twist points are rejected") {
    // A point on the twist with full group order is overwhelmingly
    // unlikely to lie in the q-subgroup before clearing.
    SeededRandom rng(8);
    int rejected = 0, tried = 0;
    for (unsigned ctr = 0; ctr < 32 && tried < 8; ++ctr) {
        auto seed = rng.bytes(16);
        auto d0 = sha512(group_hash_preimage(seed, uint8_t(ctr), 0));
        auto d1 = sha512(group_hash_preimage(seed, uint8_t(ctr), 1));
        fp::Fp2 x{fp::from_bytes_mod_p(d0), fp::from_bytes_mod_p(d1)};
        auto y = fp::sqrt(fp::add(fp::mul(fp::sqr(x), x), fp::Fp2{fp::Fp(4), fp::Fp(4)}));
        if (!y) continue;
        ++tried;
        ec::G2 raw{x, *y, fp::Fp2::one()};
        CHECK(ec::on_curve(raw));
        if (!ec::in_subgroup(raw)) {
            ++rejected;
            auto enc = ec::serialize(raw);
            CHECK_FALSE(ec::deserialize_g2(enc).has_value());
        }
        // clearing always lands in the subgroup
        CHECK(ec::in_subgroup(ec::clear_cofactor(raw)));
    }
    CHECK(rejected > 0);
}

TEST_CASE("setup is deterministic at the single supported level") {
    auto p1 = setup(128);
    auto p2 = setup(128);
    CHECK(p1.serialize() == p2.serialize());
    CHECK(mpz_probab_prime_p(p1.q.get_mpz_t(), 40) != 0);
    CHECK(p1.q > (mpz_class(1) << 128));
    CHECK_THROWS_AS(setup(64), UnsupportedSecurityLevel);
    CHECK_THROWS_AS(setup(256), UnsupportedSecurityLevel);
    auto parsed = SystemParams::parse(p1.serialize());
    CHECK(parsed.serialize() == p1.serialize());
    // corrupting the header is rejected
    auto blob = p1.serialize();
    blob[1] = 99;
    CHECK_THROWS(SystemParams::parse(blob));
}

TEST_CASE("hash_to_scalar: deterministic, in range, domain separated") {
    auto a = hash_to_scalar(std::string("Movie"));
    auto b = hash_to_scalar(std::string("Movie"));
    CHECK(a == b);
    CHECK(!(a == hash_to_scalar(std::string("Product"))));
    SeededRandom rng(9);
    for (int i = 0; i < 10000; ++i) {
        auto s = hash_to_scalar(rng.bytes(1 + i % 64));
        CHECK(s.v >= 1);
        CHECK(s.v < order());
    }
    // domain separation: the two hashes consume differently-prefixed input
    Bytes data = str_bytes("same input");
    auto pre_s = scalar_hash_preimage(data);
    auto pre_g = group_hash_preimage(data, 0, 0);
    CHECK(pre_s[0] == 0x01);
    CHECK(pre_g[0] == 0x02);
    CHECK(pre_s[0] != pre_g[0]);
}

TEST_CASE("hash_to_group: deterministic, valid, never identity") {
    Bytes data = str_bytes("token preimage");
    auto p1 = hash_to_group(data);
    auto p2 = hash_to_group(data);
    CHECK(ec::eq(p1, p2));
    CHECK_FALSE(p1.is_infinity());
    SeededRandom rng(10);
    for (int i = 0; i < 1000; ++i) {
        auto p = hash_to_group(rng.bytes(24));
        CHECK(ec::on_curve(p));
        CHECK(ec::in_subgroup(p));
        CHECK_FALSE(p.is_infinity());
    }
}

TEST_CASE("encode_preimage layout") {
    Message m{Scalar(1), Scalar(1)};
    auto enc = encode_preimage("", m);
    REQUIRE(enc.size() == 68);
    for (int i = 0; i < 35; ++i) CHECK(enc[i] == 0);
    CHECK(enc[35] == 0x01);
    for (int i = 36; i < 67; ++i) CHECK(enc[i] == 0);
    CHECK(enc[67] == 0x01);
    // length is structural
    Message m2{Scalar(7), Scalar(9)};
    CHECK(encode_preimage("Product", m2).size() == 68 + 7);
    // injective in c
    CHECK(encode_preimage("a", m) != encode_preimage("b", m));
    CHECK(encode_preimage("", m) != encode_preimage("", m2));
}

TEST_CASE("scalar serialization round-trips") {
    SeededRandom rng(11);
    for (int i = 0; i < 1000; ++i) {
        Scalar s = random_scalar(rng);
        auto b = scalar_to_bytes(s);
        auto back = scalar_from_bytes(b);
        REQUIRE(back.has_value());
        CHECK(*back == s);
    }
    // q itself is rejected
    std::array<uint8_t, 32> qb{};
    mpz_export(qb.data() + 32 - mpz_sizeinbase(order().get_mpz_t(), 256), nullptr, 1, 1, 1, 0,
               order().get_mpz_t());
    CHECK_FALSE(scalar_from_bytes(qb).has_value());
}

TEST_CASE("gt serialization round-trips") {
    auto e = ec::pair(ec::g1_generator(), ec::g2_generator());
    auto enc = ec::serialize(e);
    auto back = ec::deserialize_gt(enc);
    REQUIRE(back.has_value());
    CHECK(*back == e);
}

TEST_CASE("seeded rng is reproducible, system rng is not constant") {
    SeededRandom a(42), b(42);
    CHECK(a.bytes(64) == b.bytes(64));
    auto s1 = SystemRandom::instance().bytes(32);
    auto s2 = SystemRandom::instance().bytes(32);
    CHECK(s1 != s2);
}
