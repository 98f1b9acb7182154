#pragma once

#include <functional>
#include <map>

#include "loyalty/taxonomy.hpp"
#include "loyalty/token.hpp"

namespace loyalty::program {

using core::Scalar;
using core::SystemParams;
using nlohmann::json;

// ---- reward schedule ----

// Linked-group reward target R(n) = round(P * n * (1 + gamma * ln n));
// the bonus for growing a group is granted incrementally as a
// difference of consecutive targets.
struct RewardPolicy {
    double base_per_level = 10.0;  // B: points per disclosed level
    double linkage_scale = 10.0;   // P
    double linkage_gamma = 0.1;    // gamma >= 0
    int window_days = 365;         // W: linkage bonus window

    void validate() const;  // throws std::invalid_argument
    json to_json() const;
    static RewardPolicy from_json(const json& j);
};

long long reward_group_total(const RewardPolicy& policy, long long n);   // R(n)
long long reward_claim_base(const RewardPolicy& policy, size_t disclosed_levels);

// ---- public info (the c string) ----

// Canonical, injective string form: compact JSON with sorted keys.
struct PublicInfo {
    enum class Kind { receipt, points } kind = Kind::receipt;
    // receipt
    std::string label;
    std::string epoch;  // "YYYY-MM"
    // points
    std::string vendor_id;
    long long denom = 0;
    std::string expires;  // "YYYY-MM-DD"

    static PublicInfo receipt(std::string label, std::string epoch);
    static PublicInfo points(std::string vendor_id, long long denom, std::string expires);
    std::string to_string() const;
    static std::optional<PublicInfo> parse(const std::string& s);
};

// UTC calendar helpers shared by vendor and wallet.
std::string epoch_of(int64_t ts_ms);          // "YYYY-MM"
std::string date_of(int64_t ts_ms);           // "YYYY-MM-DD"
int64_t system_now_ms();

// ---- vendor ----

struct VendorConfig {
    RewardPolicy policy;
    std::vector<long long> denominations = {1, 2, 5, 10, 20, 50};
    int validity_days = 365;  // point token lifetime
    std::string vendor_id;    // defaults to a fingerprint of pk

    void validate() const;
};

struct ClaimResult {
    bool accepted = false;
    std::string reason;        // reject reason when not accepted
    size_t start_depth = 0;    // depth of most specific disclosed label
    size_t level = 0;          // generalization level l = d - start_depth
    long long base = 0;
    long long bonus = 0;
};

struct SubmitOutcome {
    std::vector<ClaimResult> claims;
    long long total_award = 0;
    std::vector<std::string> point_cs;  // proposed point token public infos
};

enum class RedeemStatus { accepted, expired, bad_signature, double_spend, malformed };
const char* to_string(RedeemStatus s);

struct RedeemGroup {
    std::string c;
    std::vector<core::Message> messages;
    pbsig::Signature sigma;  // aggregate when messages.size() > 1
};

struct RedeemOutcome {
    struct GroupResult {
        RedeemStatus status = RedeemStatus::malformed;
        long long credited = 0;
    };
    std::vector<GroupResult> groups;
    long long total_credited = 0;
    bool all_accepted = false;
};

// One vendor's complete loyalty-program state: key pair, taxonomy,
// spent ledger and reward policy. Sessions may call concurrently;
// verification-and-award serializes internally.
class Vendor {
  public:
    using Clock = std::function<int64_t()>;

    // Fresh key pair (VendorSetup).
    Vendor(const SystemParams& params, const std::string& taxonomy_doc, VendorConfig config,
           RandomSource& rng, std::unique_ptr<tokens::SpentLedger> ledger = nullptr,
           Clock clock = system_now_ms);
    // Existing key pair (daemon restart).
    Vendor(const SystemParams& params, const std::string& taxonomy_doc, VendorConfig config,
           pbsig::VendorKeyPair keys, std::unique_ptr<tokens::SpentLedger> ledger = nullptr,
           Clock clock = system_now_ms);

    const SystemParams& params() const { return params_; }
    const pbsig::VendorKeyPair& keys() const { return keys_; }
    const tax::Taxonomy& taxonomy() const { return taxonomy_; }
    const VendorConfig& config() const { return config_; }
    tokens::SpentLedger& ledger() { return *ledger_; }
    const tokens::SpentLedger& ledger() const { return *ledger_; }
    int64_t now_ms() const { return clock_(); }

    // Published enrollment bundle: pk, params, taxonomy, policy constants.
    json bundle() const;

    // Use, step 1: the vendor proposes the public infos for the full
    // generalization path of a leaf product.
    std::vector<std::string> propose_receipt_cs(const std::string& product) const;

    // Use, step 2: blind-sign one element per path node. Validates that
    // the c values are exactly a current-epoch full path.
    std::vector<ec::G2> sign_receipt_batch(const std::vector<std::string>& cs,
                                           const std::vector<ec::G2>& us) const;

    // Submit: verify chains, spend atomically per claim, award points.
    SubmitOutcome handle_submit(const std::vector<std::vector<tokens::Token>>& claims);

    // Issue: blind-sign point tokens previously awarded in this session.
    // `expected_cs` is the proposal returned by handle_submit.
    std::vector<ec::G2> sign_points_batch(const std::vector<std::string>& cs,
                                          const std::vector<ec::G2>& us,
                                          const std::vector<std::string>& expected_cs) const;

    // Redeem: spend point tokens (aggregate verification per c-group).
    RedeemOutcome handle_redeem(const std::vector<RedeemGroup>& groups);

    // Hook where a real deployment would check that a purchase was paid
    // for before issuing receipts. Default: always allowed.
    void set_issue_gate(std::function<bool(const std::string&)> gate) { issue_gate_ = std::move(gate); }

    // Greedy decomposition of an amount into denominations.
    std::vector<long long> decompose(long long amount) const;

  private:
    ClaimResult process_claim(const std::vector<tokens::Token>& claim_tokens);
    long long window_group_claims(const Scalar& y, int64_t now) const;

    SystemParams params_;
    pbsig::VendorKeyPair keys_;
    std::string taxonomy_doc_;
    tax::Taxonomy taxonomy_;
    VendorConfig config_;
    std::unique_ptr<tokens::SpentLedger> ledger_;
    Clock clock_;
    std::function<bool(const std::string&)> issue_gate_;
    std::mutex award_mu_;  // serializes spend-and-award so bonuses telescope
};

// ---- customer wallet ----

struct VendorBundle {
    SystemParams params;
    ec::G1 pk;
    std::string vendor_id;
    std::string taxonomy_doc;
    tax::Taxonomy taxonomy;
    RewardPolicy policy;
    std::vector<long long> denominations;
    int validity_days = 0;

    static VendorBundle from_json(const json& j);  // throws on malformed
};

struct Purchase {
    uint64_t id = 0;
    std::string product;
    std::string persona;  // "" when a throwaway y was used
    std::vector<tokens::Token> tokens;  // leaf first, root last
    bool consumed = false;
};

struct PointHolding {
    tokens::Token token;
    long long denom = 0;
    std::string expires;
    bool spent = false;
};

class Wallet {
  public:
    Wallet() = default;
    explicit Wallet(VendorBundle bundle);

    const VendorBundle& vendor() const { return bundle_; }

    // Resolve a linkability choice to a y value; persona names map to
    // stored values, creating one on first use.
    Scalar y_for(const std::optional<std::string>& persona, RandomSource& rng);

    Purchase& add_purchase(std::string product, std::string persona,
                           std::vector<tokens::Token> tokens);
    std::vector<Purchase>& purchases() { return purchases_; }
    const std::vector<Purchase>& purchases() const { return purchases_; }
    Purchase* find_purchase(uint64_t id);

    void add_point(tokens::Token token, long long denom, std::string expires);
    std::vector<PointHolding>& points() { return points_; }
    const std::vector<PointHolding>& points() const { return points_; }

    const std::map<std::string, Scalar>& personas() const { return personas_; }

    long long awarded_total = 0;
    long long redeemed_total = 0;

    json to_json() const;
    static Wallet from_json(const json& j);
    void save(const std::string& path) const;  // atomic: temp + rename
    static Wallet load(const std::string& path);

  private:
    VendorBundle bundle_;
    std::map<std::string, Scalar> personas_;
    std::vector<Purchase> purchases_;
    std::vector<PointHolding> points_;
    uint64_t next_id_ = 1;
};

}  // namespace loyalty::program
