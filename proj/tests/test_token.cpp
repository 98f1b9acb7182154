#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "fixtures.hpp"
#include "loyalty/token.hpp"

using namespace loyalty;
using namespace loyalty::core;
using namespace loyalty::tokens;

namespace {

const SystemParams& params() {
    static SystemParams p = setup(128);
    return p;
}

const pbsig::VendorKeyPair& keys() {
    static auto k = pbsig::VendorKeyPair::from_secret(params(), Scalar(12345));
    return k;
}

bool contains_bytes(const Bytes& haystack, std::span<const uint8_t> needle) {
    if (needle.size() > haystack.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i)
        if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
    return false;
}

}  // namespace

TEST_CASE("token json round-trips and rejects malformed encodings") {
    SeededRandom rng(1);
    auto t = issue_in_process(params(), keys(), "some info", Scalar(9), rng);
    auto j = token_to_json(t);
    auto back = token_from_json(j);
    REQUIRE(back.has_value());
    CHECK(back->c == t.c);
    CHECK(back->m == t.m);
    CHECK(ec::eq(back->sigma.sigma, t.sigma.sigma));
    auto bad = j;
    bad["sigma"] = "!!!not-base64!!!";
    CHECK_FALSE(token_from_json(bad).has_value());
    bad = j;
    bad.erase("alpha");
    CHECK_FALSE(token_from_json(bad).has_value());
    CHECK_FALSE(token_from_json(nlohmann::json::array()).has_value());
}

TEST_CASE("issuance: fresh alpha per run, both verify") {
    SeededRandom rng(2);
    Scalar y(77);
    auto t1 = issue_in_process(params(), keys(), "c-info", y, rng);
    auto t2 = issue_in_process(params(), keys(), "c-info", y, rng);
    CHECK(!(t1.m.alpha == t2.m.alpha));
    CHECK(t1.m.y == t2.m.y);
    CHECK_FALSE(ec::serialize(t1.sigma.sigma) == ec::serialize(t2.sigma.sigma));
    CHECK(pbsig::verify(params(), keys().pk, t1.c, t1.m, t1.sigma));
    CHECK(pbsig::verify(params(), keys().pk, t2.c, t2.m, t2.sigma));
}

TEST_CASE("issuance transcript: vendor view carries no alpha, y or sigma bytes") {
    SeededRandom rng(3);
    VendorIssueView view;
    auto t = issue_in_process(params(), keys(), "transcript check", Scalar(55), rng);
    auto t2 = issue_in_process(params(), keys(), "transcript check", Scalar(55), rng, &view);
    (void)t;
    Bytes vendor_saw;
    append(vendor_saw, view.c);
    append(vendor_saw, std::span<const uint8_t>(view.u_bytes));
    append(vendor_saw, std::span<const uint8_t>(view.v_bytes));
    auto alpha_bytes = scalar_to_bytes(t2.m.alpha);
    auto y_bytes = scalar_to_bytes(t2.m.y);
    auto sigma_bytes = ec::serialize(t2.sigma.sigma);
    CHECK_FALSE(contains_bytes(vendor_saw, alpha_bytes));
    CHECK_FALSE(contains_bytes(vendor_saw, y_bytes));
    CHECK_FALSE(contains_bytes(vendor_saw, sigma_bytes));
}

TEST_CASE("issuance: seeded run reproduces the recorded token") {
    SeededRandom rng(777);
    auto t = issue_in_process(params(), pbsig::VendorKeyPair::from_secret(params(), Scalar(11)),
                              "seeded-c", Scalar(9), rng);
    CHECK(to_hex(scalar_to_bytes(t.m.alpha)) ==
          "59c649b2cc110c50a90f1eaedc434987fc8811fb023826927f6ab0ab68957a27");
    CHECK(to_hex(ec::serialize(t.sigma.sigma)) ==
          "aa0624c0febafd5de99c898f603e0a853c0e029e437c28672fbe0b6f711fec10bd62ec42125d0640facb"
          "3e94df0acaa60da7f369ba3b2da7e7448662c497c1689f0e2d9fcb20be016e270e69614d1c5ee819cd56"
          "29a16091bc8a10d7c00781c4");
}

TEST_CASE("issuance rejects the identity blinded element") {
    CHECK_THROWS_AS(issuance_sign(keys(), "c", ec::G2::infinity()), IssuanceError);
}

TEST_CASE("verify_and_spend: accept, double-spend, linkage") {
    SeededRandom rng(4);
    SpentLedger ledger;
    Scalar y(42);
    auto t1 = issue_in_process(params(), keys(), "c1", y, rng);
    auto r1 = verify_and_spend(params(), ledger, keys().pk, t1, 1000);
    CHECK(r1.status == SpendStatus::accepted);
    CHECK_FALSE(r1.linked_existing);
    CHECK(r1.group_size == 1);
    // replay
    auto r2 = verify_and_spend(params(), ledger, keys().pk, t1, 2000);
    CHECK(r2.status == SpendStatus::double_spend);
    // same y, distinct alpha: linked
    auto t2 = issue_in_process(params(), keys(), "c2", y, rng);
    auto r3 = verify_and_spend(params(), ledger, keys().pk, t2, 3000);
    CHECK(r3.status == SpendStatus::accepted);
    CHECK(r3.linked_existing);
    CHECK(r3.group_size == 2);
    // bad signature
    auto t3 = issue_in_process(params(), keys(), "c3", y, rng);
    t3.sigma.sigma = ec::mul(params().h, Scalar(123).v);
    CHECK(verify_and_spend(params(), ledger, keys().pk, t3, 0).status ==
          SpendStatus::bad_signature);
    // malformed message
    Token zero = t2;
    zero.m.alpha = Scalar(0);
    CHECK(verify_and_spend(params(), ledger, keys().pk, zero, 0).status == SpendStatus::malformed);
    // rejected submissions never mutate the ledger
    CHECK(ledger.spent_count() == 2);
}

TEST_CASE("linkage_report: order, disjointness, unknown y") {
    SeededRandom rng(5);
    SpentLedger ledger;
    Scalar ya(1000), yb(2000);
    CHECK(ledger.linkage_report(ya).empty());
    std::vector<Token> toks;
    for (int i = 0; i < 3; ++i)
        toks.push_back(issue_in_process(params(), keys(), "c" + std::to_string(i), ya, rng));
    auto tb = issue_in_process(params(), keys(), "cb", yb, rng);
    for (int i = 0; i < 3; ++i)
        CHECK(verify_and_spend(params(), ledger, keys().pk, toks[i], 100 + i).status ==
              SpendStatus::accepted);
    CHECK(verify_and_spend(params(), ledger, keys().pk, tb, 999).status == SpendStatus::accepted);
    auto rep = ledger.linkage_report(ya);
    REQUIRE(rep.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(rep[i].c == "c" + std::to_string(i));  // submission order
        CHECK(rep[i].alpha == toks[i].m.alpha);
    }
    auto repb = ledger.linkage_report(yb);
    REQUIRE(repb.size() == 1);
    for (const auto& ra : rep)
        CHECK(!(ra.alpha == repb[0].alpha));
}

TEST_CASE("aggregate spend: all-or-nothing") {
    SeededRandom rng(6);
    SpentLedger ledger;
    std::string c = "points:5";
    std::vector<Token> toks;
    std::vector<Message> ms;
    std::vector<pbsig::Signature> sigs;
    for (int i = 0; i < 3; ++i) {
        auto t = issue_in_process(params(), keys(), c, random_scalar(rng), rng);
        ms.push_back(t.m);
        sigs.push_back(t.sigma);
        toks.push_back(t);
    }
    auto agg = pbsig::aggregate(sigs);
    auto ok = verify_and_spend_aggregate(params(), ledger, keys().pk, c, ms, agg, 10);
    CHECK(ok.status == SpendStatus::accepted);
    CHECK(ledger.spent_count() == 3);
    for (const auto& t : toks) CHECK(ledger.is_spent(t.m.alpha));

    // one alpha already spent: nothing new is spent
    std::vector<Message> ms2;
    std::vector<pbsig::Signature> sigs2;
    for (int i = 0; i < 2; ++i) {
        auto t = issue_in_process(params(), keys(), c, random_scalar(rng), rng);
        ms2.push_back(t.m);
        sigs2.push_back(t.sigma);
    }
    ms2.push_back(ms[0]);
    sigs2.push_back(sigs[0]);
    auto fail = verify_and_spend_aggregate(params(), ledger, keys().pk, c, ms2,
                                           pbsig::aggregate(sigs2), 20);
    CHECK(fail.status == SpendStatus::double_spend);
    CHECK(fail.offending_index == 2);
    CHECK(ledger.spent_count() == 3);
    CHECK_FALSE(ledger.is_spent(ms2[0].alpha));
    CHECK_FALSE(ledger.is_spent(ms2[1].alpha));

    // duplicated alpha inside the batch
    std::vector<Message> dup = {ms2[0], ms2[0]};
    auto dup_res = verify_and_spend_aggregate(params(), ledger, keys().pk, c, dup,
                                              pbsig::aggregate({sigs2[0], sigs2[0]}), 30);
    CHECK(dup_res.status == SpendStatus::malformed);
    CHECK(ledger.spent_count() == 3);
}

TEST_CASE("ledger log: bit-exact record layout") {
    auto path = fixtures::temp_path("layout");
    {
        auto ledger = SpentLedger::open(path);
        SpendRecord rec{"ab", Scalar(0x0102), Scalar(3), 0x01020304050607ll};
        CHECK(ledger->try_spend(rec).status == SpendStatus::accepted);
    }
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(data.size() == 6 + 32 + 32 + 4 + 2 + 8);
    CHECK(data.substr(0, 4) == "LPLG");
    CHECK(data[4] == 0x00);
    CHECK(data[5] == 0x01);  // version
    // alpha, big-endian, 32 bytes
    CHECK(uint8_t(data[6 + 30]) == 0x01);
    CHECK(uint8_t(data[6 + 31]) == 0x02);
    // y
    CHECK(uint8_t(data[6 + 63]) == 0x03);
    // c length + bytes
    CHECK(uint8_t(data[6 + 67]) == 2);
    CHECK(data.substr(6 + 68, 2) == "ab");
    // timestamp
    CHECK(uint8_t(data[6 + 70 + 7]) == 0x07);
    CHECK(uint8_t(data[6 + 70 + 1]) == 0x01);
    remove(path.c_str());
}

TEST_CASE("ledger persistence: replay restores state, truncated tail tolerated") {
    SeededRandom rng(7);
    auto path = fixtures::temp_path("persist");
    std::vector<Token> toks;
    Scalar y(31337);
    {
        auto ledger = SpentLedger::open(path);
        for (int i = 0; i < 5; ++i) {
            auto t = issue_in_process(params(), keys(), "c" + std::to_string(i),
                                      i < 3 ? y : random_scalar(rng), rng);
            toks.push_back(t);
            CHECK(verify_and_spend(params(), *ledger, keys().pk, t, 100 + i).status ==
                  SpendStatus::accepted);
        }
    }  // closed without ceremony
    {
        auto ledger = SpentLedger::open(path);
        CHECK(ledger->spent_count() == 5);
        for (const auto& t : toks) CHECK(ledger->is_spent(t.m.alpha));
        auto rep = ledger->linkage_report(y);
        REQUIRE(rep.size() == 3);
        CHECK(rep[0].ts_ms == 100);
        CHECK(rep[2].ts_ms == 102);
        // replayed token still rejected after restart
        CHECK(verify_and_spend(params(), *ledger, keys().pk, toks[0], 999).status ==
              SpendStatus::double_spend);
    }
    // simulate a crash mid-append: write half a record
    {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        out << "\x11\x22\x33partial";
    }
    {
        auto ledger = SpentLedger::open(path);
        CHECK(ledger->spent_count() == 5);  // torn tail dropped, commits intact
        // the log stays appendable after recovery
        auto t = issue_in_process(params(), keys(), "post-crash", Scalar(8), rng);
        CHECK(verify_and_spend(params(), *ledger, keys().pk, t, 500).status ==
              SpendStatus::accepted);
    }
    {
        auto ledger = SpentLedger::open(path);
        CHECK(ledger->spent_count() == 6);
        CHECK(ledger->linkage_report(Scalar(8)).size() == 1);
    }
    remove(path.c_str());
}

TEST_CASE("ledger rejects a foreign header") {
    auto path = fixtures::temp_path("header");
    {
        std::ofstream out(path, std::ios::binary);
        out << "XXXX\x00\x01";
    }
    CHECK_THROWS(SpentLedger::open(path));
    remove(path.c_str());
}

TEST_CASE("no double spend under 16-way concurrent submission") {
    SeededRandom rng(8);
    SpentLedger ledger;
    auto t = issue_in_process(params(), keys(), "race", Scalar(5), rng);
    constexpr int kThreads = 16;
    std::atomic<int> accepted{0}, rejected{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < kThreads; ++i) {
        threads.emplace_back([&] {
            auto r = verify_and_spend(params(), ledger, keys().pk, t, 1);
            if (r.status == SpendStatus::accepted) ++accepted;
            else if (r.status == SpendStatus::double_spend) ++rejected;
        });
    }
    for (auto& th : threads) th.join();
    CHECK(accepted == 1);
    CHECK(rejected == kThreads - 1);
    CHECK(ledger.spent_count() == 1);
}
