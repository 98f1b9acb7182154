#include "loyalty/token.hpp"

#include <unistd.h>

#include <cstring>

namespace loyalty::tokens {

using nlohmann::json;

const char* to_string(SpendStatus s) {
    switch (s) {
        case SpendStatus::accepted: return "accepted";
        case SpendStatus::bad_signature: return "bad-signature";
        case SpendStatus::double_spend: return "double-spend";
        case SpendStatus::malformed: return "malformed";
    }
    return "unknown";
}

json token_to_json(const Token& t) {
    return json{{"c", t.c},
                {"alpha", base64url_encode(core::scalar_to_bytes(t.m.alpha))},
                {"y", base64url_encode(core::scalar_to_bytes(t.m.y))},
                {"sigma", base64url_encode(ec::serialize(t.sigma.sigma))}};
}

std::optional<Token> token_from_json(const json& j) {
    if (!j.is_object() || !j.contains("c") || !j["c"].is_string()) return std::nullopt;
    auto field = [&](const char* k) -> std::optional<Bytes> {
        if (!j.contains(k) || !j[k].is_string()) return std::nullopt;
        return base64url_decode(j[k].get<std::string>());
    };
    auto ab = field("alpha"), yb = field("y"), sb = field("sigma");
    if (!ab || !yb || !sb) return std::nullopt;
    auto alpha = core::scalar_from_bytes(*ab);
    auto y = core::scalar_from_bytes(*yb);
    auto sigma = ec::deserialize_g2(*sb);
    if (!alpha || !y || !sigma) return std::nullopt;
    return Token{j["c"].get<std::string>(), Message{*alpha, *y}, pbsig::Signature{*sigma}};
}

// ---- ledger ----

namespace {

constexpr char kMagic[4] = {'L', 'P', 'L', 'G'};
constexpr uint16_t kVersion = 1;

std::string key_bytes(const Scalar& s) {
    auto b = core::scalar_to_bytes(s);
    return std::string(b.begin(), b.end());
}

}  // namespace

SpentLedger::~SpentLedger() {
    if (log_) fclose(log_);
}

std::unique_ptr<SpentLedger> SpentLedger::open(const std::string& path) {
    auto ledger = std::make_unique<SpentLedger>();
    long valid_end = 0;
    long file_size = 0;
    FILE* f = fopen(path.c_str(), "rb");
    if (f) {
        fseek(f, 0, SEEK_END);
        file_size = ftell(f);
        fseek(f, 0, SEEK_SET);
        char magic[4];
        uint8_t ver[2];
        if (fread(magic, 1, 4, f) == 4 && memcmp(magic, kMagic, 4) == 0 &&
            fread(ver, 1, 2, f) == 2 && ((uint16_t(ver[0]) << 8) | ver[1]) == kVersion) {
            valid_end = 6;
            for (;;) {
                uint8_t fixed[68];
                if (fread(fixed, 1, 68, f) != 68) break;
                uint32_t clen = read_u32be(std::span<const uint8_t>(fixed + 64, 4));
                std::string c(clen, '\0');
                if (clen > 0 && fread(c.data(), 1, clen, f) != clen) break;
                uint8_t tsb[8];
                if (fread(tsb, 1, 8, f) != 8) break;
                auto alpha = core::scalar_from_bytes(std::span<const uint8_t>(fixed, 32));
                auto y = core::scalar_from_bytes(std::span<const uint8_t>(fixed + 32, 32));
                if (!alpha || !y) break;  // corrupt tail
                SpendRecord rec;
                rec.alpha = *alpha;
                rec.y = *y;
                rec.c = std::move(c);
                rec.ts_ms = int64_t(read_u64be(tsb));
                ledger->commit_locked(rec);
                valid_end = ftell(f);
            }
        } else {
            fclose(f);
            throw std::runtime_error("ledger: bad header in " + path);
        }
        fclose(f);
        // drop any torn record from an interrupted append
        if (file_size > valid_end && truncate(path.c_str(), valid_end) != 0)
            throw std::runtime_error("ledger: cannot truncate torn tail in " + path);
    }
    // reopen for append, writing the header if the file is new
    FILE* out = fopen(path.c_str(), "ab");
    if (!out) throw std::runtime_error("ledger: cannot open " + path);
    fseek(out, 0, SEEK_END);
    if (ftell(out) == 0) {
        fwrite(kMagic, 1, 4, out);
        uint8_t ver[2] = {uint8_t(kVersion >> 8), uint8_t(kVersion & 0xff)};
        fwrite(ver, 1, 2, out);
        fflush(out);
    }
    ledger->log_ = out;
    return ledger;
}

void SpentLedger::commit_locked(const SpendRecord& rec) {
    spent_.insert(key_bytes(rec.alpha));
    groups_[key_bytes(rec.y)].push_back(rec);
}

void SpentLedger::write_record(const SpendRecord& rec) {
    if (!log_) return;
    Bytes buf;
    auto ab = core::scalar_to_bytes(rec.alpha);
    auto yb = core::scalar_to_bytes(rec.y);
    append(buf, std::span<const uint8_t>(ab));
    append(buf, std::span<const uint8_t>(yb));
    append_u32be(buf, uint32_t(rec.c.size()));
    append(buf, rec.c);
    append_u64be(buf, uint64_t(rec.ts_ms));
    fwrite(buf.data(), 1, buf.size(), log_);
    fflush(log_);
}

SpendOutcome SpentLedger::try_spend(const SpendRecord& rec) {
    std::lock_guard lock(mu_);
    if (spent_.count(key_bytes(rec.alpha)))
        return {SpendStatus::double_spend, false, 0};
    auto it = groups_.find(key_bytes(rec.y));
    bool linked = it != groups_.end() && !it->second.empty();
    commit_locked(rec);
    write_record(rec);
    return {SpendStatus::accepted, linked, groups_[key_bytes(rec.y)].size()};
}

AggregateOutcome SpentLedger::try_spend_batch(const std::vector<SpendRecord>& recs) {
    std::lock_guard lock(mu_);
    std::unordered_set<std::string> batch;
    for (size_t i = 0; i < recs.size(); ++i) {
        std::string k = key_bytes(recs[i].alpha);
        if (!batch.insert(k).second) return {SpendStatus::malformed, i};
        if (spent_.count(k)) return {SpendStatus::double_spend, i};
    }
    for (const auto& rec : recs) {
        commit_locked(rec);
        write_record(rec);
    }
    return {SpendStatus::accepted, std::nullopt};
}

bool SpentLedger::is_spent(const Scalar& alpha) const {
    std::lock_guard lock(mu_);
    return spent_.count(key_bytes(alpha)) != 0;
}

std::vector<SpendRecord> SpentLedger::linkage_report(const Scalar& y) const {
    std::lock_guard lock(mu_);
    auto it = groups_.find(key_bytes(y));
    if (it == groups_.end()) return {};
    return it->second;
}

size_t SpentLedger::spent_count() const {
    std::lock_guard lock(mu_);
    return spent_.size();
}

std::vector<Scalar> SpentLedger::linkage_keys() const {
    std::lock_guard lock(mu_);
    std::vector<Scalar> out;
    out.reserve(groups_.size());
    for (const auto& [k, v] : groups_) {
        auto s = core::scalar_from_bytes(Bytes(k.begin(), k.end()));
        if (s) out.push_back(*s);
    }
    return out;
}

// ---- issuance ----

IssuanceSession issuance_start(const SystemParams& params, const std::string& c, const Scalar& y,
                               RandomSource& rng) {
    if (y.is_zero()) throw IssuanceError("y must be nonzero");
    Message m{core::random_scalar(rng), y};
    Scalar r = core::random_scalar(rng);
    auto res = pbsig::blind(params, c, m, r);
    return {std::move(res.state), res.u};
}

ec::G2 issuance_sign(const pbsig::VendorKeyPair& keys, const std::string& c, const ec::G2& u) {
    if (u.is_infinity()) throw IssuanceError("blinded element is the identity");
    if (!ec::in_subgroup(u)) throw IssuanceError("blinded element outside the group");
    return pbsig::sign_blinded(keys, c, u);
}

std::optional<Token> issuance_finish(const SystemParams& params, const ec::G1& pk,
                                     IssuanceSession&& session, const ec::G2& v) {
    if (v.is_infinity()) return std::nullopt;
    auto sig = pbsig::unblind(v, session.state);
    Token t{session.state.c, session.state.m, sig};
    if (!pbsig::verify(params, pk, t.c, t.m, t.sigma)) return std::nullopt;
    return t;
}

Token issue_in_process(const SystemParams& params, const pbsig::VendorKeyPair& keys,
                       const std::string& c, const Scalar& y, RandomSource& rng,
                       VendorIssueView* view) {
    auto session = issuance_start(params, c, y, rng);
    ec::G2 u = session.u;
    ec::G2 v = issuance_sign(keys, c, u);
    if (view) {
        view->c = c;
        auto ub = ec::serialize(u);
        auto vb = ec::serialize(v);
        view->u_bytes.assign(ub.begin(), ub.end());
        view->v_bytes.assign(vb.begin(), vb.end());
    }
    auto token = issuance_finish(params, keys.pk, std::move(session), v);
    if (!token) throw IssuanceError("issued signature failed local verification");
    return *token;
}

// ---- spend protocols ----

SpendOutcome verify_and_spend(const SystemParams& params, SpentLedger& ledger, const ec::G1& pk,
                              const Token& token, int64_t now_ms) {
    if (token.m.alpha.is_zero() || token.m.y.is_zero()) return {SpendStatus::malformed, false, 0};
    if (!pbsig::verify(params, pk, token.c, token.m, token.sigma))
        return {SpendStatus::bad_signature, false, 0};
    return ledger.try_spend({token.c, token.m.alpha, token.m.y, now_ms});
}

AggregateOutcome verify_and_spend_aggregate(const SystemParams& params, SpentLedger& ledger,
                                            const ec::G1& pk, const std::string& c,
                                            const std::vector<Message>& messages,
                                            const pbsig::Signature& sigma_agg, int64_t now_ms) {
    if (messages.empty()) return {SpendStatus::malformed, std::nullopt};
    for (size_t i = 0; i < messages.size(); ++i)
        if (messages[i].alpha.is_zero() || messages[i].y.is_zero())
            return {SpendStatus::malformed, i};
    for (size_t i = 0; i < messages.size(); ++i)
        for (size_t j = i + 1; j < messages.size(); ++j)
            if (messages[i].alpha == messages[j].alpha) return {SpendStatus::malformed, j};
    if (!pbsig::verify_aggregate(params, pk, c, messages, sigma_agg))
        return {SpendStatus::bad_signature, std::nullopt};
    std::vector<SpendRecord> recs;
    recs.reserve(messages.size());
    for (const auto& m : messages) recs.push_back({c, m.alpha, m.y, now_ms});
    return ledger.try_spend_batch(recs);
}

}  // namespace loyalty::tokens
