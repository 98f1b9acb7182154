#include "loyalty/program.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include "loyalty/sha.hpp"

namespace loyalty::program {

// ---- reward schedule ----

void RewardPolicy::validate() const {
    if (base_per_level < 0) throw std::invalid_argument("policy: base_per_level must be >= 0");
    if (linkage_scale < 0) throw std::invalid_argument("policy: linkage_scale must be >= 0");
    if (linkage_gamma < 0) throw std::invalid_argument("policy: linkage_gamma must be >= 0");
    if (window_days < 1) throw std::invalid_argument("policy: window_days must be >= 1");
}

json RewardPolicy::to_json() const {
    return json{{"base_per_level", base_per_level},
                {"linkage_scale", linkage_scale},
                {"linkage_gamma", linkage_gamma},
                {"window_days", window_days}};
}

RewardPolicy RewardPolicy::from_json(const json& j) {
    RewardPolicy p;
    p.base_per_level = j.at("base_per_level").get<double>();
    p.linkage_scale = j.at("linkage_scale").get<double>();
    p.linkage_gamma = j.at("linkage_gamma").get<double>();
    p.window_days = j.at("window_days").get<int>();
    p.validate();
    return p;
}

long long reward_group_total(const RewardPolicy& policy, long long n) {
    if (n <= 0) return 0;
    double v = policy.linkage_scale * double(n) * (1.0 + policy.linkage_gamma * std::log(double(n)));
    long long r = llround(v);
    return r < 0 ? 0 : r;
}

long long reward_claim_base(const RewardPolicy& policy, size_t disclosed_levels) {
    long long r = llround(policy.base_per_level * double(disclosed_levels));
    return r < 0 ? 0 : r;
}

// ---- public info ----

PublicInfo PublicInfo::receipt(std::string label, std::string epoch) {
    PublicInfo p;
    p.kind = Kind::receipt;
    p.label = std::move(label);
    p.epoch = std::move(epoch);
    return p;
}

PublicInfo PublicInfo::points(std::string vendor_id, long long denom, std::string expires) {
    PublicInfo p;
    p.kind = Kind::points;
    p.vendor_id = std::move(vendor_id);
    p.denom = denom;
    p.expires = std::move(expires);
    return p;
}

std::string PublicInfo::to_string() const {
    // nlohmann keeps object keys sorted, so dump() is canonical
    if (kind == Kind::receipt)
        return json{{"epoch", epoch}, {"kind", "receipt"}, {"label", label}}.dump();
    return json{{"denom", denom}, {"expires", expires}, {"kind", "points"}, {"vendor", vendor_id}}
        .dump();
}

std::optional<PublicInfo> PublicInfo::parse(const std::string& s) {
    json j = json::parse(s, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        return std::nullopt;
    std::string kind = j["kind"];
    PublicInfo p;
    if (kind == "receipt") {
        if (!j.contains("label") || !j["label"].is_string() || !j.contains("epoch") ||
            !j["epoch"].is_string() || j.size() != 3)
            return std::nullopt;
        p = receipt(j["label"], j["epoch"]);
    } else if (kind == "points") {
        if (!j.contains("vendor") || !j["vendor"].is_string() || !j.contains("denom") ||
            !j["denom"].is_number_integer() || !j.contains("expires") ||
            !j["expires"].is_string() || j.size() != 4)
            return std::nullopt;
        p = points(j["vendor"], j["denom"], j["expires"]);
    } else {
        return std::nullopt;
    }
    if (p.to_string() != s) return std::nullopt;  // non-canonical spelling
    return p;
}

// ---- calendar ----

std::string epoch_of(int64_t ts_ms) {
    time_t secs = time_t(ts_ms / 1000);
    tm parts{};
    gmtime_r(&secs, &parts);
    char buf[16];
    snprintf(buf, sizeof buf, "%04d-%02d", parts.tm_year + 1900, parts.tm_mon + 1);
    return buf;
}

std::string date_of(int64_t ts_ms) {
    time_t secs = time_t(ts_ms / 1000);
    tm parts{};
    gmtime_r(&secs, &parts);
    char buf[16];
    snprintf(buf, sizeof buf, "%04d-%02d-%02d", parts.tm_year + 1900, parts.tm_mon + 1,
             parts.tm_mday);
    return buf;
}

int64_t system_now_ms() {
    return int64_t(std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count());
}

// ---- vendor ----

void VendorConfig::validate() const {
    policy.validate();
    if (denominations.empty()) throw std::invalid_argument("denominations must be non-empty");
    if (denominations.front() != 1)
        throw std::invalid_argument("smallest denomination must be 1");
    for (size_t i = 0; i + 1 < denominations.size(); ++i)
        if (denominations[i] >= denominations[i + 1])
            throw std::invalid_argument("denominations must be strictly ascending");
    if (validity_days < 1) throw std::invalid_argument("validity_days must be >= 1");
}

namespace {

std::string pk_fingerprint(const ec::G1& pk) {
    auto enc = ec::serialize(pk);
    auto d = sha256(enc);
    return to_hex(std::span<const uint8_t>(d.data(), 8));
}

}  // namespace

Vendor::Vendor(const SystemParams& params, const std::string& taxonomy_doc, VendorConfig config,
               RandomSource& rng, std::unique_ptr<tokens::SpentLedger> ledger, Clock clock)
    : Vendor(params, taxonomy_doc, std::move(config),
             pbsig::VendorKeyPair::generate(params, rng), std::move(ledger), std::move(clock)) {}

Vendor::Vendor(const SystemParams& params, const std::string& taxonomy_doc, VendorConfig config,
               pbsig::VendorKeyPair keys, std::unique_ptr<tokens::SpentLedger> ledger, Clock clock)
    : params_(params),
      keys_(std::move(keys)),
      taxonomy_doc_(taxonomy_doc),
      taxonomy_(tax::Taxonomy::parse(taxonomy_doc)),
      config_(std::move(config)),
      ledger_(ledger ? std::move(ledger) : std::make_unique<tokens::SpentLedger>()),
      clock_(std::move(clock)) {
    if (config_.vendor_id.empty()) config_.vendor_id = pk_fingerprint(keys_.pk);
    config_.validate();
}

json Vendor::bundle() const {
    auto pkb = ec::serialize(keys_.pk);
    return json{{"params", base64url_encode(params_.serialize())},
                {"pk", base64url_encode(pkb)},
                {"vendor", config_.vendor_id},
                {"taxonomy", taxonomy_doc_},
                {"policy", config_.policy.to_json()},
                {"denominations", config_.denominations},
                {"validity_days", config_.validity_days}};
}

std::vector<std::string> Vendor::propose_receipt_cs(const std::string& product) const {
    if (!taxonomy_.contains(product)) throw std::invalid_argument("unknown product '" + product + "'");
    if (!taxonomy_.is_leaf(product))
        throw std::invalid_argument("'" + product + "' is a category, not a product");
    if (issue_gate_ && !issue_gate_(product))
        throw std::invalid_argument("issuance declined for '" + product + "'");
    std::string epoch = epoch_of(clock_());
    std::vector<std::string> cs;
    for (const auto& label : taxonomy_.path_to_root(product))
        cs.push_back(PublicInfo::receipt(label, epoch).to_string());
    return cs;
}

std::vector<ec::G2> Vendor::sign_receipt_batch(const std::vector<std::string>& cs,
                                               const std::vector<ec::G2>& us) const {
    if (cs.size() != us.size() || cs.empty())
        throw std::invalid_argument("mismatched receipt signing batch");
    // the batch must be exactly the current-epoch path of one product
    std::string epoch = epoch_of(clock_());
    std::vector<std::string> labels;
    for (const auto& c : cs) {
        auto info = PublicInfo::parse(c);
        if (!info || info->kind != PublicInfo::Kind::receipt)
            throw std::invalid_argument("not a receipt public info: " + c);
        if (info->epoch != epoch)
            throw std::invalid_argument("receipt epoch mismatch: " + info->epoch);
        labels.push_back(info->label);
    }
    if (labels.empty() || !taxonomy_.contains(labels.front()) || !taxonomy_.is_leaf(labels.front()))
        throw std::invalid_argument("receipt batch must start at a product");
    auto expect = taxonomy_.path_to_root(labels.front());
    if (labels != expect)
        throw std::invalid_argument("receipt batch is not a full generalization path");
    std::vector<ec::G2> vs;
    vs.reserve(us.size());
    for (size_t i = 0; i < us.size(); ++i) vs.push_back(tokens::issuance_sign(keys_, cs[i], us[i]));
    return vs;
}

long long Vendor::window_group_claims(const Scalar& y, int64_t now) const {
    int64_t cutoff = now - int64_t(config_.policy.window_days) * 86400000ll;
    long long n = 0;
    for (const auto& rec : ledger_->linkage_report(y)) {
        if (rec.ts_ms < cutoff) continue;
        auto info = PublicInfo::parse(rec.c);
        // every accepted claim spends exactly one root receipt, so root
        // records count claims
        if (info && info->kind == PublicInfo::Kind::receipt && info->label == taxonomy_.root())
            ++n;
    }
    return n;
}

ClaimResult Vendor::process_claim(const std::vector<tokens::Token>& claim_tokens) {
    ClaimResult res;
    if (claim_tokens.empty()) {
        res.reason = "malformed: empty claim";
        return res;
    }
    std::vector<std::string> labels;
    for (const auto& t : claim_tokens) {
        auto info = PublicInfo::parse(t.c);
        if (!info || info->kind != PublicInfo::Kind::receipt) {
            res.reason = "malformed: not a receipt token";
            return res;
        }
        labels.push_back(info->label);
    }
    auto chain = taxonomy_.validate_chain(labels);
    if (!chain.valid) {
        res.reason = "invalid chain: " + chain.reason;
        return res;
    }
    res.start_depth = chain.start_depth;
    res.level = taxonomy_.leaf_depth() - chain.start_depth;
    for (const auto& t : claim_tokens) {
        if (!pbsig::verify(params_, keys_.pk, t.c, t.m, t.sigma)) {
            res.reason = "bad-signature";
            return res;
        }
    }
    int64_t now = clock_();
    std::vector<tokens::SpendRecord> recs;
    for (const auto& t : claim_tokens) recs.push_back({t.c, t.m.alpha, t.m.y, now});
    // commit and count under one lock so concurrent same-y claims
    // telescope correctly
    std::lock_guard lock(award_mu_);
    auto spent = ledger_->try_spend_batch(recs);
    if (spent.status != tokens::SpendStatus::accepted) {
        res.reason = tokens::to_string(spent.status);
        return res;
    }
    res.accepted = true;
    res.base = reward_claim_base(config_.policy, res.start_depth);
    const Scalar& y_root = claim_tokens.back().m.y;
    long long n = window_group_claims(y_root, now);
    res.bonus = reward_group_total(config_.policy, n) - reward_group_total(config_.policy, n - 1);
    return res;
}

SubmitOutcome Vendor::handle_submit(const std::vector<std::vector<tokens::Token>>& claims) {
    SubmitOutcome out;
    for (const auto& claim : claims) {
        auto res = process_claim(claim);
        if (res.accepted) out.total_award += res.base + res.bonus;
        out.claims.push_back(std::move(res));
    }
    std::string expires = date_of(clock_() + int64_t(config_.validity_days) * 86400000ll);
    for (long long denom : decompose(out.total_award))
        out.point_cs.push_back(PublicInfo::points(config_.vendor_id, denom, expires).to_string());
    return out;
}

std::vector<ec::G2> Vendor::sign_points_batch(const std::vector<std::string>& cs,
                                              const std::vector<ec::G2>& us,
                                              const std::vector<std::string>& expected_cs) const {
    if (cs.size() != us.size()) throw std::invalid_argument("mismatched points signing batch");
    auto pending = expected_cs;
    for (const auto& c : cs) {
        auto it = std::find(pending.begin(), pending.end(), c);
        if (it == pending.end())
            throw std::invalid_argument("point token was not awarded in this session");
        pending.erase(it);
    }
    std::vector<ec::G2> vs;
    vs.reserve(us.size());
    for (size_t i = 0; i < us.size(); ++i) vs.push_back(tokens::issuance_sign(keys_, cs[i], us[i]));
    return vs;
}

RedeemOutcome Vendor::handle_redeem(const std::vector<RedeemGroup>& groups) {
    RedeemOutcome out;
    std::string today = date_of(clock_());
    for (const auto& g : groups) {
        RedeemOutcome::GroupResult res;
        auto info = PublicInfo::parse(g.c);
        if (!info || info->kind != PublicInfo::Kind::points || info->vendor_id != config_.vendor_id ||
            std::find(config_.denominations.begin(), config_.denominations.end(), info->denom) ==
                config_.denominations.end() ||
            g.messages.empty()) {
            res.status = RedeemStatus::malformed;
            out.groups.push_back(res);
            continue;
        }
        if (info->expires < today) {
            res.status = RedeemStatus::expired;
            out.groups.push_back(res);
            continue;
        }
        int64_t now = clock_();
        auto map_status = [](tokens::SpendStatus s) {
            switch (s) {
                case tokens::SpendStatus::accepted: return RedeemStatus::accepted;
                case tokens::SpendStatus::bad_signature: return RedeemStatus::bad_signature;
                case tokens::SpendStatus::double_spend: return RedeemStatus::double_spend;
                case tokens::SpendStatus::malformed: return RedeemStatus::malformed;
            }
            return RedeemStatus::malformed;
        };
        if (g.messages.size() == 1) {
            tokens::Token t{g.c, g.messages[0], g.sigma};
            auto spend = tokens::verify_and_spend(params_, *ledger_, keys_.pk, t, now);
            res.status = map_status(spend.status);
        } else {
            auto spend = tokens::verify_and_spend_aggregate(params_, *ledger_, keys_.pk, g.c,
                                                            g.messages, g.sigma, now);
            res.status = map_status(spend.status);
        }
        if (res.status == RedeemStatus::accepted) {
            res.credited = info->denom * (long long)(g.messages.size());
            out.total_credited += res.credited;
        }
        out.groups.push_back(res);
    }
    out.all_accepted = std::all_of(out.groups.begin(), out.groups.end(), [](const auto& g) {
        return g.status == RedeemStatus::accepted;
    });
    return out;
}

std::vector<long long> Vendor::decompose(long long amount) const {
    std::vector<long long> out;
    for (auto it = config_.denominations.rbegin(); it != config_.denominations.rend(); ++it) {
        while (amount >= *it) {
            out.push_back(*it);
            amount -= *it;
        }
    }
    return out;
}

const char* to_string(RedeemStatus s) {
    switch (s) {
        case RedeemStatus::accepted: return "accepted";
        case RedeemStatus::expired: return "expired";
        case RedeemStatus::bad_signature: return "bad-signature";
        case RedeemStatus::double_spend: return "double-spend";
        case RedeemStatus::malformed: return "malformed";
    }
    return "unknown";
}

// ---- bundle / wallet ----

VendorBundle VendorBundle::from_json(const json& j) {
    VendorBundle b;
    auto pb = base64url_decode(j.at("params").get<std::string>());
    if (!pb) throw std::invalid_argument("bundle: bad params encoding");
    b.params = SystemParams::parse(*pb);
    auto pkb = base64url_decode(j.at("pk").get<std::string>());
    if (!pkb) throw std::invalid_argument("bundle: bad pk encoding");
    auto pk = ec::deserialize_g1(*pkb);
    if (!pk || pk->is_infinity()) throw std::invalid_argument("bundle: invalid vendor key");
    b.pk = *pk;
    b.vendor_id = j.at("vendor").get<std::string>();
    b.taxonomy_doc = j.at("taxonomy").get<std::string>();
    b.taxonomy = tax::Taxonomy::parse(b.taxonomy_doc);
    b.policy = RewardPolicy::from_json(j.at("policy"));
    b.denominations = j.at("denominations").get<std::vector<long long>>();
    b.validity_days = j.at("validity_days").get<int>();
    if (b.denominations.empty() || b.denominations.front() != 1)
        throw std::invalid_argument("bundle: bad denominations");
    return b;
}

Wallet::Wallet(VendorBundle bundle) : bundle_(std::move(bundle)) {}

Scalar Wallet::y_for(const std::optional<std::string>& persona, RandomSource& rng) {
    if (!persona) return core::random_scalar(rng);
    auto it = personas_.find(*persona);
    if (it != personas_.end()) return it->second;
    Scalar y = core::random_scalar(rng);
    personas_[*persona] = y;
    return y;
}

Purchase& Wallet::add_purchase(std::string product, std::string persona,
                               std::vector<tokens::Token> toks) {
    Purchase p;
    p.id = next_id_++;
    p.product = std::move(product);
    p.persona = std::move(persona);
    p.tokens = std::move(toks);
    purchases_.push_back(std::move(p));
    return purchases_.back();
}

Purchase* Wallet::find_purchase(uint64_t id) {
    for (auto& p : purchases_)
        if (p.id == id) return &p;
    return nullptr;
}

void Wallet::add_point(tokens::Token token, long long denom, std::string expires) {
    points_.push_back({std::move(token), denom, std::move(expires), false});
}

json Wallet::to_json() const {
    json personas = json::object();
    for (const auto& [name, y] : personas_)
        personas[name] = base64url_encode(core::scalar_to_bytes(y));
    json purchases = json::array();
    for (const auto& p : purchases_) {
        json toks = json::array();
        for (const auto& t : p.tokens) toks.push_back(tokens::token_to_json(t));
        purchases.push_back(json{{"id", p.id},
                                 {"product", p.product},
                                 {"persona", p.persona},
                                 {"tokens", toks},
                                 {"consumed", p.consumed}});
    }
    json points = json::array();
    for (const auto& p : points_)
        points.push_back(json{{"token", tokens::token_to_json(p.token)},
                              {"denom", p.denom},
                              {"expires", p.expires},
                              {"spent", p.spent}});
    return json{{"version", 1},
                {"vendor",
                 {{"params", base64url_encode(bundle_.params.serialize())},
                  {"pk", base64url_encode(ec::serialize(bundle_.pk))},
                  {"vendor", bundle_.vendor_id},
                  {"taxonomy", bundle_.taxonomy_doc},
                  {"policy", bundle_.policy.to_json()},
                  {"denominations", bundle_.denominations},
                  {"validity_days", bundle_.validity_days}}},
                {"personas", personas},
                {"purchases", purchases},
                {"points", points},
                {"awarded_total", awarded_total},
                {"redeemed_total", redeemed_total},
                {"next_id", next_id_}};
}

Wallet Wallet::from_json(const json& j) {
    if (j.at("version").get<int>() != 1) throw std::invalid_argument("wallet: unknown version");
    Wallet w(VendorBundle::from_json(j.at("vendor")));
    for (const auto& [name, yv] : j.at("personas").items()) {
        auto yb = base64url_decode(yv.get<std::string>());
        if (!yb) throw std::invalid_argument("wallet: bad persona encoding");
        auto y = core::scalar_from_bytes(*yb);
        if (!y) throw std::invalid_argument("wallet: bad persona value");
        w.personas_[name] = *y;
    }
    for (const auto& pj : j.at("purchases")) {
        Purchase p;
        p.id = pj.at("id").get<uint64_t>();
        p.product = pj.at("product").get<std::string>();
        p.persona = pj.at("persona").get<std::string>();
        p.consumed = pj.at("consumed").get<bool>();
        for (const auto& tj : pj.at("tokens")) {
            auto t = tokens::token_from_json(tj);
            if (!t) throw std::invalid_argument("wallet: bad token");
            p.tokens.push_back(std::move(*t));
        }
        w.purchases_.push_back(std::move(p));
    }
    for (const auto& pj : j.at("points")) {
        auto t = tokens::token_from_json(pj.at("token"));
        if (!t) throw std::invalid_argument("wallet: bad point token");
        w.points_.push_back({std::move(*t), pj.at("denom").get<long long>(),
                             pj.at("expires").get<std::string>(), pj.at("spent").get<bool>()});
    }
    w.awarded_total = j.at("awarded_total").get<long long>();
    w.redeemed_total = j.at("redeemed_total").get<long long>();
    w.next_id_ = j.at("next_id").get<uint64_t>();
    return w;
}

void Wallet::save(const std::string& path) const {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << to_json().dump(2) << "\n";
    }
    if (rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot replace " + path);
}

Wallet Wallet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j = json::parse(in);
    return from_json(j);
}

}  // namespace loyalty::program
