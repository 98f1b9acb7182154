#pragma once

#include <map>

#include "loyalty/crypto_core.hpp"

#include <json.hpp>

namespace loyalty::bench {

struct Stats {
    double mean_ms = 0;
    double median_ms = 0;
    double stddev_ms = 0;
    size_t samples = 0;
};

// Per-primitive timings plus protocol cost estimates derived from the
// operation counts of the issuance and verification protocols.
struct BenchReport {
    std::map<std::string, Stats> ops;

    // model: issuance = 3 group exponentiations + scalar hash/add/inv,
    // verification = 1 exp + 1 mul + 1 group hash + 1 scalar hash + 2 pairings
    double issuance_model_ms = 0;
    double verification_model_ms = 0;
    double issuance_measured_ms = 0;
    double verification_measured_ms = 0;

    // journal-reported timings on a 2007-era symmetric Type-A curve;
    // context only, never a reproduction target
    static const std::map<std::string, double>& reference_ms();

    nlohmann::json to_json() const;
    std::string to_table() const;
};

// samples must be >= 100.
BenchReport run_bench(const core::SystemParams& params, size_t samples);

}  // namespace loyalty::bench
