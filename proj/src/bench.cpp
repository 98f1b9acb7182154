#include "loyalty/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "loyalty/pbsig.hpp"

namespace loyalty::bench {

using Clock = std::chrono::steady_clock;

namespace {

Stats summarize(std::vector<double>& samples_ms) {
    Stats s;
    s.samples = samples_ms.size();
    if (samples_ms.empty()) return s;
    s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / samples_ms.size();
    std::sort(samples_ms.begin(), samples_ms.end());
    size_t mid = samples_ms.size() / 2;
    s.median_ms = samples_ms.size() % 2 ? samples_ms[mid]
                                        : (samples_ms[mid - 1] + samples_ms[mid]) / 2.0;
    double var = 0;
    for (double v : samples_ms) var += (v - s.mean_ms) * (v - s.mean_ms);
    s.stddev_ms = std::sqrt(var / samples_ms.size());
    return s;
}

template <typename F>
Stats time_op(size_t samples, F&& op) {
    // warm-up excluded from statistics
    for (int i = 0; i < 3; ++i) op(i);
    std::vector<double> times;
    times.reserve(samples);
    for (size_t i = 0; i < samples; ++i) {
        auto t0 = Clock::now();
        op(i);
        auto t1 = Clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return summarize(times);
}

}  // namespace

const std::map<std::string, double>& BenchReport::reference_ms() {
    static const std::map<std::string, double> ref = {
        {"g_mul", 0.09}, {"g_exp", 17.2}, {"g_exp_precomp", 2.48},
        {"pairing", 20.8}, {"pairing_precomp", 10.76},
    };
    return ref;
}

BenchReport run_bench(const core::SystemParams& params, size_t samples) {
    if (samples < 100) throw std::invalid_argument("bench needs at least 100 samples");
    BenchReport rep;
    SeededRandom rng(0xb3ac5);

    // random operands, fresh per sample so caches do not flatter results
    auto rand_scalar = [&] { return core::random_scalar(rng); };
    std::vector<core::Scalar> ks(samples + 3);
    for (auto& k : ks) k = rand_scalar();

    std::vector<ec::G1> g1s(samples + 3);
    for (auto& p : g1s) p = ec::mul(params.g, rand_scalar().v);
    std::vector<ec::G2> g2s(samples + 3);
    for (auto& p : g2s) p = ec::mul(params.h, rand_scalar().v);

    ec::G1 sink1 = params.g;
    ec::G2 sink2 = params.h;
    ec::Gt sinkt;
    core::Scalar sinks;

    rep.ops["g1_mul"] = time_op(samples, [&](size_t i) { sink1 = ec::add(g1s[i], g1s[i + 1]); });
    rep.ops["g2_mul"] = time_op(samples, [&](size_t i) { sink2 = ec::add(g2s[i], g2s[i + 1]); });
    rep.ops["g1_exp"] = time_op(samples, [&](size_t i) { sink1 = ec::mul(g1s[i], ks[i].v); });
    rep.ops["g2_exp"] = time_op(samples, [&](size_t i) { sink2 = ec::mul(g2s[i], ks[i].v); });

    ec::G1FixedBase fixed_g(params.g);
    rep.ops["g1_exp_precomp"] = time_op(samples, [&](size_t i) { sink1 = fixed_g.mul(ks[i].v); });

    rep.ops["pairing"] =
        time_op(samples, [&](size_t i) { sinkt = ec::pair(g1s[i], g2s[i]); });
    ec::PreparedG2 prep = ec::prepare(g2s[0]);
    rep.ops["pairing_precomp"] =
        time_op(samples, [&](size_t i) { sinkt = ec::pair_prepared(g1s[i], prep); });

    rep.ops["hash_to_scalar"] = time_op(samples, [&](size_t i) {
        Bytes data{uint8_t(i), uint8_t(i >> 8), 0x5a};
        sinks = core::hash_to_scalar(data);
    });
    rep.ops["hash_to_group"] = time_op(samples, [&](size_t i) {
        Bytes data{uint8_t(i), uint8_t(i >> 8), 0xa5};
        sink2 = core::hash_to_group(data);
    });
    rep.ops["scalar_add"] = time_op(samples, [&](size_t i) { sinks = core::sc_add(ks[i], ks[i + 1]); });
    rep.ops["scalar_inv"] = time_op(samples, [&](size_t i) { sinks = core::sc_inv(ks[i]); });

    // measured protocol wall-clock
    auto keys = pbsig::VendorKeyPair::generate(params, rng);
    std::string c = "bench-info";
    {
        std::vector<double> times;
        pbsig::Signature sig;
        core::Message m{rand_scalar(), rand_scalar()};
        for (size_t i = 0; i < samples / 4 + 25; ++i) {
            m.alpha = rand_scalar();
            auto r = rand_scalar();
            auto t0 = Clock::now();
            auto blinded = pbsig::blind(params, c, m, r);
            auto v = pbsig::sign_blinded(keys, c, blinded.u);
            sig = pbsig::unblind(v, blinded.state);
            auto t1 = Clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        rep.issuance_measured_ms = summarize(times).mean_ms;
        std::vector<double> vtimes;
        bool ok = true;
        for (size_t i = 0; i < samples / 4 + 25; ++i) {
            auto t0 = Clock::now();
            ok &= pbsig::verify(params, keys.pk, c, m, sig);
            auto t1 = Clock::now();
            vtimes.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        if (!ok) throw std::runtime_error("bench verification failed");
        rep.verification_measured_ms = summarize(vtimes).mean_ms;
    }

    // operation-count model, from the protocol step counts:
    // issuance: vendor 1 exp in G + 1 scalar hash + 1 add + 1 inv;
    //           customer 2 exps in G + 1 inv (G2 carries the signatures)
    rep.issuance_model_ms = 3 * rep.ops["g2_exp"].mean_ms + rep.ops["hash_to_scalar"].mean_ms +
                            rep.ops["scalar_add"].mean_ms + 2 * rep.ops["scalar_inv"].mean_ms;
    // verification: 1 exp + 1 mul (G1 side) + 1 group hash + 1 scalar
    // hash + 2 pairings
    rep.verification_model_ms = rep.ops["g1_exp"].mean_ms + rep.ops["g1_mul"].mean_ms +
                                rep.ops["hash_to_group"].mean_ms +
                                rep.ops["hash_to_scalar"].mean_ms + 2 * rep.ops["pairing"].mean_ms;
    return rep;
}

nlohmann::json BenchReport::to_json() const {
    nlohmann::json ops_json = nlohmann::json::object();
    for (const auto& [name, s] : ops) {
        ops_json[name] = {{"mean_ms", s.mean_ms},
                          {"median_ms", s.median_ms},
                          {"stddev_ms", s.stddev_ms},
                          {"samples", s.samples}};
    }
    return nlohmann::json{
        {"ops", ops_json},
        {"protocol",
         {{"issuance_model_ms", issuance_model_ms},
          {"issuance_measured_ms", issuance_measured_ms},
          {"verification_model_ms", verification_model_ms},
          {"verification_measured_ms", verification_measured_ms}}},
        {"reference_type_a_2007", reference_ms()},
        {"note", "reference column is the original symmetric-pairing report; "
                 "hardware and curve differ, values are context only"}};
}

std::string BenchReport::to_table() const {
    std::ostringstream out;
    char line[160];
    snprintf(line, sizeof line, "%-18s %10s %10s %10s %8s %12s\n", "operation", "mean ms",
             "median ms", "stddev", "samples", "reference ms");
    out << line;
    out << std::string(72, '-') << "\n";
    auto ref_of = [&](const std::string& name) -> std::string {
        static const std::map<std::string, std::string> remap = {
            {"g1_mul", "g_mul"},        {"g1_exp", "g_exp"},
            {"g1_exp_precomp", "g_exp_precomp"}, {"pairing", "pairing"},
            {"pairing_precomp", "pairing_precomp"}};
        auto it = remap.find(name);
        if (it == remap.end()) return "-";
        char buf[32];
        snprintf(buf, sizeof buf, "%.2f", reference_ms().at(it->second));
        return buf;
    };
    for (const auto& [name, s] : ops) {
        snprintf(line, sizeof line, "%-18s %10.4f %10.4f %10.4f %8zu %12s\n", name.c_str(),
                 s.mean_ms, s.median_ms, s.stddev_ms, s.samples, ref_of(name).c_str());
        out << line;
    }
    out << std::string(72, '-') << "\n";
    snprintf(line, sizeof line, "issuance:     model %.3f ms   measured %.3f ms\n",
             issuance_model_ms, issuance_measured_ms);
    out << line;
    snprintf(line, sizeof line, "verification: model %.3f ms   measured %.3f ms\n",
             verification_model_ms, verification_measured_ms);
    out << line;
    out << "reference column: original symmetric-pairing numbers (2007-era curve), context only\n";
    return out.str();
}

}  // namespace loyalty::bench
