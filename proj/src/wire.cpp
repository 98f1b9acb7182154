#include "loyalty/wire.hpp"

#include <algorithm>

namespace loyalty::wire {

using program::PublicInfo;
using tokens::Token;

// ---- transcript ----

TranscriptLog::TranscriptLog(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open transcript " + path);
}

void TranscriptLog::record(uint64_t session, const char* dir, const std::string& raw) {
    std::lock_guard lock(mu_);
    out_ << json{{"session", session}, {"dir", dir}, {"msg", raw}}.dump() << "\n";
    out_.flush();
}

// ---- vendor session ----

namespace {

json error_msg(const std::string& message) {
    return json{{"v", kProtocolVersion}, {"kind", "error"}, {"message", message}};
}

std::optional<ec::G2> decode_g2(const json& j) {
    if (!j.is_string()) return std::nullopt;
    auto b = base64url_decode(j.get<std::string>());
    if (!b) return std::nullopt;
    return ec::deserialize_g2(*b);
}

}  // namespace

VendorSession::Reply VendorSession::handle(const std::string& line) {
    json msg = json::parse(line, nullptr, false);
    if (msg.is_discarded() || !msg.is_object())
        return {error_msg("malformed message").dump(), true};
    if (!msg.contains("v") || !msg["v"].is_number_integer() ||
        msg["v"].get<int>() != kProtocolVersion)
        return {error_msg("unsupported protocol version").dump(), true};
    if (!msg.contains("kind") || !msg["kind"].is_string())
        return {error_msg("missing kind").dump(), true};
    try {
        json reply = dispatch(msg);
        return {reply.dump(), false};
    } catch (const std::exception& e) {
        phase_ = Phase::done;
        return {error_msg(e.what()).dump(), true};
    }
}

json VendorSession::dispatch(const json& msg) {
    std::string kind = msg["kind"];
    if (kind == "get-bundle") {
        if (phase_ != Phase::start) throw WireError("bundle read only opens a session");
        return json{{"v", kProtocolVersion}, {"kind", "bundle"}, {"bundle", vendor_.bundle()}};
    }
    if (kind == "issue-request") {
        std::string phase = msg.value("phase", "");
        if (phase == "offer") {
            if (phase_ != Phase::start) throw WireError("unexpected issue offer");
            std::string product = msg.value("product", "");
            auto cs = vendor_.propose_receipt_cs(product);
            phase_ = Phase::issue_offered;
            return json{{"v", kProtocolVersion},
                        {"kind", "issue-response"},
                        {"phase", "offer"},
                        {"cs", cs}};
        }
        if (phase == "sign") {
            if (!msg.contains("items") || !msg["items"].is_array() || msg["items"].empty())
                throw WireError("sign request without items");
            std::vector<std::string> cs;
            std::vector<ec::G2> us;
            for (const auto& item : msg["items"]) {
                if (!item.is_object() || !item.contains("c") || !item["c"].is_string())
                    throw WireError("bad sign item");
                auto u = decode_g2(item.value("u", json()));
                if (!u) throw WireError("bad blinded element encoding");
                cs.push_back(item["c"].get<std::string>());
                us.push_back(*u);
            }
            std::vector<ec::G2> vs;
            if (phase_ == Phase::await_point_sign) {
                vs = vendor_.sign_points_batch(cs, us, pending_point_cs_);
            } else if (phase_ == Phase::start || phase_ == Phase::issue_offered) {
                vs = vendor_.sign_receipt_batch(cs, us);
            } else {
                throw WireError("unexpected sign request");
            }
            phase_ = Phase::done;
            json out_vs = json::array();
            for (const auto& v : vs) out_vs.push_back(base64url_encode(ec::serialize(v)));
            return json{{"v", kProtocolVersion},
                        {"kind", "issue-response"},
                        {"phase", "sign"},
                        {"vs", out_vs}};
        }
        throw WireError("unknown issue phase");
    }
    if (kind == "submit-request") {
        if (phase_ != Phase::start) throw WireError("unexpected submit");
        if (!msg.contains("claims") || !msg["claims"].is_array())
            throw WireError("submit without claims");
        std::vector<std::vector<Token>> claims;
        for (const auto& cj : msg["claims"]) {
            if (!cj.is_array()) throw WireError("bad claim");
            std::vector<Token> toks;
            for (const auto& tj : cj) {
                auto t = tokens::token_from_json(tj);
                if (!t) throw WireError("bad token encoding");
                toks.push_back(std::move(*t));
            }
            claims.push_back(std::move(toks));
        }
        auto outcome = vendor_.handle_submit(claims);
        pending_point_cs_ = outcome.point_cs;
        phase_ = pending_point_cs_.empty() ? Phase::done : Phase::await_point_sign;
        json results = json::array();
        for (const auto& r : outcome.claims)
            results.push_back(json{{"accepted", r.accepted},
                                   {"reason", r.reason},
                                   {"level", r.level},
                                   {"start_depth", r.start_depth},
                                   {"base", r.base},
                                   {"bonus", r.bonus}});
        return json{{"v", kProtocolVersion},
                    {"kind", "submit-response"},
                    {"results", results},
                    {"award", outcome.total_award},
                    {"point_cs", outcome.point_cs}};
    }
    if (kind == "redeem-request") {
        if (phase_ != Phase::start) throw WireError("unexpected redeem");
        if (!msg.contains("groups") || !msg["groups"].is_array())
            throw WireError("redeem without groups");
        std::vector<program::RedeemGroup> groups;
        for (const auto& gj : msg["groups"]) {
            program::RedeemGroup g;
            if (!gj.is_object() || !gj.contains("c") || !gj["c"].is_string() ||
                !gj.contains("messages") || !gj["messages"].is_array())
                throw WireError("bad redeem group");
            g.c = gj["c"].get<std::string>();
            for (const auto& mj : gj["messages"]) {
                auto ab = mj.contains("alpha") && mj["alpha"].is_string()
                              ? base64url_decode(mj["alpha"].get<std::string>())
                              : std::nullopt;
                auto yb = mj.contains("y") && mj["y"].is_string()
                              ? base64url_decode(mj["y"].get<std::string>())
                              : std::nullopt;
                if (!ab || !yb) throw WireError("bad message encoding");
                auto alpha = core::scalar_from_bytes(*ab);
                auto y = core::scalar_from_bytes(*yb);
                if (!alpha || !y) throw WireError("bad message scalar");
                g.messages.push_back({*alpha, *y});
            }
            auto sig = decode_g2(gj.value("sigma", json()));
            if (!sig) throw WireError("bad signature encoding");
            g.sigma = pbsig::Signature{*sig};
            groups.push_back(std::move(g));
        }
        auto outcome = vendor_.handle_redeem(groups);
        phase_ = Phase::done;
        json gres = json::array();
        for (const auto& g : outcome.groups)
            gres.push_back(json{{"status", program::to_string(g.status)}, {"credited", g.credited}});
        return json{{"v", kProtocolVersion},
                    {"kind", "redeem-response"},
                    {"groups", gres},
                    {"credited", outcome.total_credited},
                    {"all_accepted", outcome.all_accepted}};
    }
    throw WireError("unknown kind '" + kind + "'");
}

// ---- daemon ----

Daemon::Daemon(Vendor& vendor, const std::string& host, uint16_t port, TranscriptLog* transcript)
    : vendor_(vendor), transcript_(transcript), listener_(host, port) {
    accept_thread_ = std::thread([this] { accept_loop(); });
}

Daemon::~Daemon() { stop(); }

void Daemon::stop() {
    if (stopping_.exchange(true)) return;
    listener_.close();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard lock(conn_mu_);
    for (auto& t : conn_threads_)
        if (t.joinable()) t.join();
    conn_threads_.clear();
}

void Daemon::accept_loop() {
    while (!stopping_) {
        net::Socket sock = listener_.accept();
        if (!sock.valid()) break;
        uint64_t id = next_session_++;
        std::lock_guard lock(conn_mu_);
        conn_threads_.emplace_back(
            [this, s = std::move(sock), id]() mutable { serve_connection(std::move(s), id); });
    }
}

void Daemon::serve_connection(net::Socket sock, uint64_t session_id) {
    VendorSession session(vendor_);
    for (;;) {
        auto line = sock.read_line();
        if (!line) break;  // EOF, overlong line, or client abort
        if (transcript_) transcript_->record(session_id, "in", *line);
        VendorSession::Reply reply;
        try {
            reply = session.handle(*line);
        } catch (const std::exception& e) {
            reply = {json{{"v", kProtocolVersion}, {"kind", "error"}, {"message", e.what()}}.dump(),
                     true};
        }
        if (transcript_) transcript_->record(session_id, "out", reply.line);
        try {
            sock.write_line(reply.line);
        } catch (const net::NetError&) {
            break;
        }
        if (reply.close) break;
    }
}

// ---- channels ----

TcpChannel::TcpChannel(const std::string& host, uint16_t port)
    : sock_(net::connect(host, port)) {}

json TcpChannel::request(const json& msg) {
    sock_.write_line(msg.dump());
    auto line = sock_.read_line();
    if (!line) throw net::NetError("connection closed by vendor");
    json reply = json::parse(*line, nullptr, false);
    if (reply.is_discarded()) throw WireError("unparseable reply");
    return reply;
}

json LocalChannel::request(const json& msg) {
    if (closed_) throw WireError("session closed");
    auto reply = session_.handle(msg.dump());
    if (reply.close) closed_ = true;
    return json::parse(reply.line);
}

// ---- client operations ----

namespace {

void expect_kind(const json& reply, const std::string& kind) {
    if (!reply.is_object() || !reply.contains("kind") || !reply["kind"].is_string())
        throw WireError("malformed reply");
    if (reply["kind"] == "error")
        throw WireError("vendor error: " + reply.value("message", std::string("unknown")));
    if (reply["kind"] != kind) throw WireError("unexpected reply kind");
}

// Blind-sign a batch of cs over the channel; returns finished tokens.
std::vector<Token> run_issue_sign(Wallet& wallet, Channel& ch, const std::vector<std::string>& cs,
                                  const std::vector<core::Scalar>& ys, RandomSource& rng) {
    std::vector<tokens::IssuanceSession> sessions;
    json items = json::array();
    for (size_t i = 0; i < cs.size(); ++i) {
        auto s = tokens::issuance_start(wallet.vendor().params, cs[i], ys[i], rng);
        items.push_back(
            json{{"c", cs[i]}, {"u", base64url_encode(ec::serialize(s.u))}});
        sessions.push_back(std::move(s));
    }
    json reply = ch.request(
        json{{"v", kProtocolVersion}, {"kind", "issue-request"}, {"phase", "sign"}, {"items", items}});
    expect_kind(reply, "issue-response");
    if (!reply.contains("vs") || !reply["vs"].is_array() || reply["vs"].size() != cs.size())
        throw WireError("bad signing reply");
    std::vector<Token> out;
    for (size_t i = 0; i < cs.size(); ++i) {
        auto v = decode_g2(reply["vs"][i]);
        if (!v) throw WireError("bad signature encoding in reply");
        auto t = tokens::issuance_finish(wallet.vendor().params, wallet.vendor().pk,
                                         std::move(sessions[i]), *v);
        if (!t) throw WireError("vendor signature failed local verification");
        out.push_back(std::move(*t));
    }
    return out;
}

}  // namespace

program::VendorBundle fetch_bundle(Channel& ch) {
    json reply = ch.request(json{{"v", kProtocolVersion}, {"kind", "get-bundle"}});
    expect_kind(reply, "bundle");
    if (!reply.contains("bundle")) throw WireError("missing bundle");
    return program::VendorBundle::from_json(reply["bundle"]);
}

program::Purchase buy(Wallet& wallet, Channel& ch, const std::string& product,
                      const std::optional<std::string>& persona, RandomSource& rng) {
    const auto& tx = wallet.vendor().taxonomy;
    if (!tx.contains(product)) throw std::invalid_argument("unknown product '" + product + "'");
    if (!tx.is_leaf(product))
        throw std::invalid_argument("'" + product + "' is a category, not a product");
    json reply = ch.request(json{{"v", kProtocolVersion},
                                 {"kind", "issue-request"},
                                 {"phase", "offer"},
                                 {"product", product}});
    expect_kind(reply, "issue-response");
    if (!reply.contains("cs") || !reply["cs"].is_array()) throw WireError("offer without cs");
    std::vector<std::string> cs = reply["cs"].get<std::vector<std::string>>();
    // check the proposal against the local taxonomy before blinding
    auto path = tx.path_to_root(product);
    if (cs.size() != path.size()) throw WireError("offer does not cover the full path");
    std::string epoch;
    for (size_t i = 0; i < cs.size(); ++i) {
        auto info = PublicInfo::parse(cs[i]);
        if (!info || info->kind != PublicInfo::Kind::receipt || info->label != path[i])
            throw WireError("offer deviates from the taxonomy path");
        if (i == 0) epoch = info->epoch;
        else if (info->epoch != epoch) throw WireError("offer mixes epochs");
    }
    core::Scalar y = wallet.y_for(persona, rng);
    std::vector<core::Scalar> ys(cs.size(), y);
    auto toks = run_issue_sign(wallet, ch, cs, ys, rng);
    return wallet.add_purchase(product, persona.value_or(""), std::move(toks));
}

SubmitSummary submit(Wallet& wallet, Channel& ch, const std::vector<ClaimSpec>& claims,
                     RandomSource& rng) {
    const auto& tx = wallet.vendor().taxonomy;
    json claims_json = json::array();
    std::vector<program::Purchase*> sources;
    for (const auto& spec : claims) {
        auto* p = wallet.find_purchase(spec.purchase_id);
        if (!p) throw std::invalid_argument("no purchase " + std::to_string(spec.purchase_id));
        if (p->consumed) throw std::invalid_argument("purchase already submitted");
        if (spec.level > tx.leaf_depth()) throw std::invalid_argument("level exceeds taxonomy depth");
        json chain = json::array();
        for (size_t i = spec.level; i < p->tokens.size(); ++i)
            chain.push_back(tokens::token_to_json(p->tokens[i]));
        claims_json.push_back(std::move(chain));
        sources.push_back(p);
    }
    json reply = ch.request(
        json{{"v", kProtocolVersion}, {"kind", "submit-request"}, {"claims", claims_json}});
    expect_kind(reply, "submit-response");
    SubmitSummary out;
    const auto& results = reply.at("results");
    if (!results.is_array() || results.size() != claims.size())
        throw WireError("bad submit reply");
    for (size_t i = 0; i < results.size(); ++i) {
        program::ClaimResult r;
        r.accepted = results[i].value("accepted", false);
        r.reason = results[i].value("reason", "");
        r.level = results[i].value("level", size_t(0));
        r.start_depth = results[i].value("start_depth", size_t(0));
        r.base = results[i].value("base", 0ll);
        r.bonus = results[i].value("bonus", 0ll);
        // the whole group is consumed: its root token is now spent, so
        // withheld lower-level tokens can never form a valid chain again
        if (r.accepted) sources[i]->consumed = true;
        out.claims.push_back(std::move(r));
    }
    out.award = reply.value("award", 0ll);
    wallet.awarded_total += out.award;
    std::vector<std::string> point_cs = reply.value("point_cs", std::vector<std::string>{});
    if (!point_cs.empty()) {
        // fresh y per point token
        std::vector<core::Scalar> ys;
        for (size_t i = 0; i < point_cs.size(); ++i) ys.push_back(core::random_scalar(rng));
        auto toks = run_issue_sign(wallet, ch, point_cs, ys, rng);
        for (auto& t : toks) {
            auto info = PublicInfo::parse(t.c);
            if (!info || info->kind != PublicInfo::Kind::points)
                throw WireError("vendor proposed a non-point token");
            wallet.add_point(std::move(t), info->denom, info->expires);
            ++out.points_received;
        }
    }
    return out;
}

RedeemSummary redeem(Wallet& wallet, Channel& ch, const std::vector<size_t>& point_indexes) {
    // group by identical c; aggregate multi-token groups
    std::map<std::string, std::vector<size_t>> by_c;
    for (size_t idx : point_indexes) {
        if (idx >= wallet.points().size()) throw std::invalid_argument("bad point index");
        if (wallet.points()[idx].spent) throw std::invalid_argument("point already spent");
        by_c[wallet.points()[idx].token.c].push_back(idx);
    }
    if (by_c.empty()) throw std::invalid_argument("nothing to redeem");
    json groups = json::array();
    std::vector<std::vector<size_t>> group_indexes;
    for (const auto& [c, idxs] : by_c) {
        json messages = json::array();
        std::vector<pbsig::Signature> sigs;
        for (size_t idx : idxs) {
            const auto& t = wallet.points()[idx].token;
            messages.push_back(
                json{{"alpha", base64url_encode(core::scalar_to_bytes(t.m.alpha))},
                     {"y", base64url_encode(core::scalar_to_bytes(t.m.y))}});
            sigs.push_back(t.sigma);
        }
        auto sigma = pbsig::aggregate(sigs);
        groups.push_back(json{{"c", c},
                              {"messages", messages},
                              {"sigma", base64url_encode(ec::serialize(sigma.sigma))}});
        group_indexes.push_back(idxs);
    }
    json reply =
        ch.request(json{{"v", kProtocolVersion}, {"kind", "redeem-request"}, {"groups", groups}});
    expect_kind(reply, "redeem-response");
    RedeemSummary out;
    out.credited = reply.value("credited", 0ll);
    out.all_accepted = reply.value("all_accepted", false);
    const auto& gres = reply.at("groups");
    if (!gres.is_array() || gres.size() != group_indexes.size()) throw WireError("bad redeem reply");
    for (size_t i = 0; i < gres.size(); ++i) {
        std::string status = gres[i].value("status", "unknown");
        out.group_status.push_back(status);
        if (status == "accepted")
            for (size_t idx : group_indexes[i]) wallet.points()[idx].spent = true;
    }
    wallet.redeemed_total += out.credited;
    return out;
}

std::optional<std::vector<size_t>> choose_points(const Wallet& wallet, long long target,
                                                 const std::string& today) {
    if (target <= 0) return std::nullopt;
    std::vector<size_t> usable;
    for (size_t i = 0; i < wallet.points().size(); ++i) {
        const auto& p = wallet.points()[i];
        if (!p.spent && p.expires >= today) usable.push_back(i);
    }
    // exact subset sum over small totals
    std::map<long long, std::vector<size_t>> reach;
    reach[0] = {};
    for (size_t idx : usable) {
        long long d = wallet.points()[idx].denom;
        auto snapshot = reach;
        for (const auto& [sum, picks] : snapshot) {
            long long next = sum + d;
            if (next > target || reach.count(next)) continue;
            auto np = picks;
            np.push_back(idx);
            reach[next] = std::move(np);
        }
        if (reach.count(target)) return reach[target];
    }
    if (reach.count(target)) return reach[target];
    return std::nullopt;
}

}  // namespace loyalty::wire
