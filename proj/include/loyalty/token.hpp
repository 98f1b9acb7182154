#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "loyalty/pbsig.hpp"

#include <json.hpp>

namespace loyalty::tokens {

using core::Message;
using core::Scalar;
using core::SystemParams;

// Bearer credential: agreed public info, secret message, unblinded
// signature.
struct Token {
    std::string c;
    Message m;
    pbsig::Signature sigma;
};

nlohmann::json token_to_json(const Token& t);
std::optional<Token> token_from_json(const nlohmann::json& j);

struct SpendRecord {
    std::string c;
    Scalar alpha;
    Scalar y;
    int64_t ts_ms = 0;
};

enum class SpendStatus { accepted, bad_signature, double_spend, malformed };

const char* to_string(SpendStatus s);

struct SpendOutcome {
    SpendStatus status = SpendStatus::malformed;
    bool linked_existing = false;  // y matched an existing linkage group
    size_t group_size = 0;         // group size after this spend
};

struct AggregateOutcome {
    SpendStatus status = SpendStatus::malformed;
    std::optional<size_t> offending_index;  // for double_spend / malformed
};

// Persistent set of consumed alpha values plus y-keyed linkage groups.
// check-and-mark is linearizable; the append-only log is replayed on
// open, tolerating a truncated trailing record.
class SpentLedger {
  public:
    SpentLedger() = default;  // ephemeral, in-memory only
    ~SpentLedger();
    SpentLedger(const SpentLedger&) = delete;
    SpentLedger& operator=(const SpentLedger&) = delete;

    static std::unique_ptr<SpentLedger> open(const std::string& path);

    // Single-token atomic check-and-mark. Fails only on a replayed alpha.
    SpendOutcome try_spend(const SpendRecord& rec);
    // All-or-nothing batch; alphas must also be distinct inside the batch.
    AggregateOutcome try_spend_batch(const std::vector<SpendRecord>& recs);

    bool is_spent(const Scalar& alpha) const;
    std::vector<SpendRecord> linkage_report(const Scalar& y) const;
    size_t spent_count() const;
    std::vector<Scalar> linkage_keys() const;

  private:
    void commit_locked(const SpendRecord& rec);
    void write_record(const SpendRecord& rec);

    mutable std::mutex mu_;
    std::unordered_set<std::string> spent_;                          // alpha bytes
    std::map<std::string, std::vector<SpendRecord>> groups_;         // y bytes -> records
    FILE* log_ = nullptr;
};

struct IssuanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Customer half-state of one issuance run.
struct IssuanceSession {
    pbsig::BlindingState state;
    ec::G2 u;
};

// Step 3 of the issuance protocol: pick fresh alpha and r, blind.
IssuanceSession issuance_start(const SystemParams& params, const std::string& c, const Scalar& y,
                               RandomSource& rng);

// Vendor side: sign a blinded element. Rejects the identity element.
ec::G2 issuance_sign(const pbsig::VendorKeyPair& keys, const std::string& c, const ec::G2& u);

// Step 5: unblind and locally verify before accepting.
std::optional<Token> issuance_finish(const SystemParams& params, const ec::G1& pk,
                                     IssuanceSession&& session, const ec::G2& v);

// Everything the vendor observes during one issuance run.
struct VendorIssueView {
    std::string c;
    Bytes u_bytes;
    Bytes v_bytes;
};

// Both protocol halves in one process; used by tests and the local tools.
Token issue_in_process(const SystemParams& params, const pbsig::VendorKeyPair& keys,
                       const std::string& c, const Scalar& y, RandomSource& rng,
                       VendorIssueView* view = nullptr);

// Fig. 2: check the signature, then atomically mark spent and link.
SpendOutcome verify_and_spend(const SystemParams& params, SpentLedger& ledger, const ec::G1& pk,
                              const Token& token, int64_t now_ms);

// Aggregate variant; spending is all-or-nothing over the batch.
AggregateOutcome verify_and_spend_aggregate(const SystemParams& params, SpentLedger& ledger,
                                            const ec::G1& pk, const std::string& c,
                                            const std::vector<Message>& messages,
                                            const pbsig::Signature& sigma_agg, int64_t now_ms);

}  // namespace loyalty::tokens
