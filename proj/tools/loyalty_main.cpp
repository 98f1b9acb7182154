#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "loyalty/bench.hpp"
#include "loyalty/wire.hpp"

using namespace loyalty;
using nlohmann::json;

// exit codes: 0 ok, 2 usage, 3 network, 4 vendor/protocol reject, 5 local validation
namespace {

constexpr int kExitNetwork = 3;
constexpr int kExitProtocol = 4;
constexpr int kExitLocal = 5;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ClientArgs {
    std::string wallet_path;
    std::string endpoint;
    bool json_out = false;
};

void add_client_options(CLI::App* cmd, ClientArgs& args) {
    cmd->add_option("--wallet", args.wallet_path, "wallet file path")
        ->envname("LOYALTY_WALLET")
        ->required();
    cmd->add_option("--endpoint", args.endpoint, "vendor endpoint host:port")
        ->envname("LOYALTY_ENDPOINT");
    cmd->add_flag("--json", args.json_out, "machine-readable output");
}

wire::TcpChannel open_channel(const ClientArgs& args) {
    if (args.endpoint.empty())
        throw std::invalid_argument("no vendor endpoint (use --endpoint or LOYALTY_ENDPOINT)");
    auto [host, port] = net::parse_endpoint(args.endpoint);
    return wire::TcpChannel(host, port);
}

void emit(const ClientArgs& args, const json& machine, const std::string& human) {
    if (args.json_out)
        std::cout << machine.dump() << "\n";
    else
        std::cout << human;
}

pbsig::VendorKeyPair load_or_create_keys(const core::SystemParams& params,
                                         const std::string& path) {
    std::ifstream in(path);
    if (in) {
        json j = json::parse(in);
        auto skb = base64url_decode(j.at("sk").get<std::string>());
        if (!skb) throw std::runtime_error("bad key file");
        auto sk = core::scalar_from_bytes(*skb);
        if (!sk) throw std::runtime_error("bad key file");
        return pbsig::VendorKeyPair::from_secret(params, *sk);
    }
    auto keys = pbsig::VendorKeyPair::generate(params, SystemRandom::instance());
    json j{{"sk", base64url_encode(core::scalar_to_bytes(keys.sk))},
           {"pk", base64url_encode(ec::serialize(keys.pk))}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
    return keys;
}

int run_serve(const std::string& listen, const std::string& taxonomy_path,
              const std::string& ledger_path, const std::string& keys_path,
              const std::string& transcript_path, const std::string& port_file,
              program::VendorConfig config) {
    auto params = core::setup(128);
    std::string taxonomy_doc = read_file(taxonomy_path);
    std::unique_ptr<tokens::SpentLedger> ledger;
    if (!ledger_path.empty()) ledger = tokens::SpentLedger::open(ledger_path);
    std::unique_ptr<program::Vendor> vendor;
    if (!keys_path.empty()) {
        auto keys = load_or_create_keys(params, keys_path);
        vendor = std::make_unique<program::Vendor>(params, taxonomy_doc, config, keys,
                                                   std::move(ledger));
    } else {
        vendor = std::make_unique<program::Vendor>(params, taxonomy_doc, config,
                                                   SystemRandom::instance(), std::move(ledger));
    }
    std::unique_ptr<wire::TranscriptLog> transcript;
    if (!transcript_path.empty()) transcript = std::make_unique<wire::TranscriptLog>(transcript_path);

    auto [host, port] = net::parse_endpoint(listen);
    wire::Daemon daemon(*vendor, host, port, transcript.get());
    if (!port_file.empty()) {
        std::ofstream pf(port_file, std::ios::trunc);
        pf << daemon.port() << "\n";
    }
    std::cout << "vendor " << vendor->config().vendor_id << " listening on " << host << ":"
              << daemon.port() << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    daemon.stop();
    return 0;
}

json purchase_json(const program::Purchase& p) {
    json labels = json::array();
    for (const auto& t : p.tokens) {
        auto info = program::PublicInfo::parse(t.c);
        labels.push_back(info ? info->label : "?");
    }
    return json{{"id", p.id},
                {"product", p.product},
                {"persona", p.persona.empty() ? json() : json(p.persona)},
                {"tokens", p.tokens.size()},
                {"labels", labels},
                {"consumed", p.consumed}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-preserving loyalty program tools"};
    app.require_subcommand(1);

    // serve
    auto* serve = app.add_subcommand("serve", "run the vendor daemon");
    std::string listen = "127.0.0.1:7701", taxonomy_path, ledger_path, keys_path, transcript_path,
                port_file, denominations_csv = "1,2,5,10,20,50", vendor_id;
    program::VendorConfig config;
    serve->add_option("--listen", listen, "host:port (port 0 = ephemeral)");
    serve->add_option("--taxonomy", taxonomy_path, "taxonomy document")->required();
    serve->add_option("--ledger", ledger_path, "spent-token ledger file (persistent)");
    serve->add_option("--keys", keys_path, "vendor key file (created when missing)");
    serve->add_option("--transcript", transcript_path, "record every wire message to this file");
    serve->add_option("--port-file", port_file, "write the bound port to this file");
    serve->add_option("--base-points", config.policy.base_per_level, "points per disclosed level");
    serve->add_option("--linkage-scale", config.policy.linkage_scale, "linkage schedule scale P");
    serve->add_option("--linkage-gamma", config.policy.linkage_gamma, "linkage schedule gamma");
    serve->add_option("--window-days", config.policy.window_days, "linkage bonus time window");
    serve->add_option("--denominations", denominations_csv, "comma-separated point denominations");
    serve->add_option("--validity-days", config.validity_days, "point token validity");
    serve->add_option("--vendor-id", config.vendor_id, "vendor identifier in point tokens");

    // client commands
    ClientArgs enroll_args, buy_args, wallet_args, submit_args, redeem_args, personas_args;
    auto* enroll = app.add_subcommand("enroll", "fetch the vendor bundle and create a wallet");
    add_client_options(enroll, enroll_args);

    auto* buy = app.add_subcommand("buy", "purchase a product and collect receipt tokens");
    std::string buy_product, buy_persona;
    bool buy_fresh = false;
    add_client_options(buy, buy_args);
    buy->add_option("product", buy_product, "leaf product label")->required();
    auto* persona_opt = buy->add_option("--persona", buy_persona, "reuse this persona's linkability id");
    buy->add_flag("--fresh", buy_fresh, "unlinkable purchase (default)")->excludes(persona_opt);

    auto* wallet_cmd = app.add_subcommand("wallet", "list wallet holdings");
    add_client_options(wallet_cmd, wallet_args);

    auto* submit = app.add_subcommand("submit", "submit purchases for loyalty points");
    size_t submit_level = 0;
    std::vector<uint64_t> submit_ids;
    add_client_options(submit, submit_args);
    submit->add_option("--level", submit_level, "generalization level (0 = exact product)")
        ->required();
    submit->add_option("--purchase", submit_ids, "purchase ids (default: all unsubmitted)");

    auto* redeem = app.add_subcommand("redeem", "redeem point tokens");
    long long redeem_points = -1;
    add_client_options(redeem, redeem_args);
    redeem->add_option("--points", redeem_points, "redeem exactly this many points");

    auto* personas = app.add_subcommand("personas", "list stored personas");
    add_client_options(personas, personas_args);

    auto* bench_cmd = app.add_subcommand("bench", "time the primitive operations");
    size_t bench_samples = 100;
    bool bench_json = false;
    bench_cmd->add_option("--samples", bench_samples, "samples per operation (>= 100)");
    bench_cmd->add_flag("--json", bench_json, "machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (serve->parsed()) {
            config.denominations.clear();
            std::stringstream ss(denominations_csv);
            std::string item;
            while (std::getline(ss, item, ',')) config.denominations.push_back(std::stoll(item));
            return run_serve(listen, taxonomy_path, ledger_path, keys_path, transcript_path,
                             port_file, config);
        }

        if (enroll->parsed()) {
            auto ch = open_channel(enroll_args);
            auto bundle = wire::fetch_bundle(ch);
            program::Wallet w(std::move(bundle));
            w.save(enroll_args.wallet_path);
            emit(enroll_args,
                 json{{"vendor", w.vendor().vendor_id},
                      {"products", w.vendor().taxonomy.leaves().size()},
                      {"taxonomy_depth", w.vendor().taxonomy.leaf_depth()}},
                 "enrolled with vendor " + w.vendor().vendor_id + " (" +
                     std::to_string(w.vendor().taxonomy.leaves().size()) + " products, depth " +
                     std::to_string(w.vendor().taxonomy.leaf_depth()) + ")\n");
            return 0;
        }

        if (buy->parsed()) {
            auto w = program::Wallet::load(buy_args.wallet_path);
            auto ch = open_channel(buy_args);
            std::optional<std::string> persona;
            if (!buy_persona.empty()) persona = buy_persona;
            auto p = wire::buy(w, ch, buy_product, persona, SystemRandom::instance());
            w.save(buy_args.wallet_path);
            emit(buy_args, purchase_json(p),
                 "purchase " + std::to_string(p.id) + ": " + std::to_string(p.tokens.size()) +
                     " receipt tokens for " + buy_product +
                     (persona ? " (persona " + *persona + ")" : " (unlinkable)") + "\n");
            return 0;
        }

        if (wallet_cmd->parsed()) {
            auto w = program::Wallet::load(wallet_args.wallet_path);
            json pj = json::array();
            std::ostringstream human;
            human << "purchases:\n";
            for (const auto& p : w.purchases()) {
                pj.push_back(purchase_json(p));
                human << "  [" << p.id << "] " << p.product << " tokens=" << p.tokens.size()
                      << (p.persona.empty() ? "" : " persona=" + p.persona)
                      << (p.consumed ? " (submitted)" : "") << "\n";
            }
            json ptj = json::array();
            human << "points:\n";
            long long balance = 0;
            for (const auto& p : w.points()) {
                ptj.push_back(json{{"denom", p.denom}, {"expires", p.expires}, {"spent", p.spent}});
                if (!p.spent) balance += p.denom;
                human << "  " << p.denom << " pt, expires " << p.expires
                      << (p.spent ? " (spent)" : "") << "\n";
            }
            human << "balance: " << balance << " (awarded " << w.awarded_total << ", redeemed "
                  << w.redeemed_total << ")\n";
            emit(wallet_args,
                 json{{"purchases", pj},
                      {"points", ptj},
                      {"balance", balance},
                      {"awarded_total", w.awarded_total},
                      {"redeemed_total", w.redeemed_total}},
                 human.str());
            return 0;
        }

        if (submit->parsed()) {
            auto w = program::Wallet::load(submit_args.wallet_path);
            std::vector<wire::ClaimSpec> claims;
            if (submit_ids.empty()) {
                for (const auto& p : w.purchases())
                    if (!p.consumed) claims.push_back({p.id, submit_level});
            } else {
                for (uint64_t id : submit_ids) claims.push_back({id, submit_level});
            }
            if (claims.empty()) throw std::invalid_argument("nothing to submit");
            auto ch = open_channel(submit_args);
            auto summary = wire::submit(w, ch, claims, SystemRandom::instance());
            w.save(submit_args.wallet_path);
            json cj = json::array();
            std::ostringstream human;
            bool any_rejected = false;
            for (size_t i = 0; i < summary.claims.size(); ++i) {
                const auto& r = summary.claims[i];
                any_rejected |= !r.accepted;
                cj.push_back(json{{"purchase", claims[i].purchase_id},
                                  {"accepted", r.accepted},
                                  {"reason", r.reason},
                                  {"level", r.level},
                                  {"base", r.base},
                                  {"bonus", r.bonus}});
                human << "claim " << claims[i].purchase_id << ": "
                      << (r.accepted ? "accepted" : "rejected (" + r.reason + ")");
                if (r.accepted) human << " base=" << r.base << " bonus=" << r.bonus;
                human << "\n";
            }
            human << "awarded " << summary.award << " points in " << summary.points_received
                  << " tokens\n";
            emit(submit_args,
                 json{{"claims", cj},
                      {"award", summary.award},
                      {"points_received", summary.points_received}},
                 human.str());
            return any_rejected ? kExitProtocol : 0;
        }

        if (redeem->parsed()) {
            auto w = program::Wallet::load(redeem_args.wallet_path);
            std::string today = program::date_of(program::system_now_ms());
            std::vector<size_t> picks;
            if (redeem_points >= 0) {
                auto chosen = wire::choose_points(w, redeem_points, today);
                if (!chosen)
                    throw std::invalid_argument(
                        "cannot compose " + std::to_string(redeem_points) +
                        " points from held denominations");
                picks = *chosen;
            } else {
                for (size_t i = 0; i < w.points().size(); ++i)
                    if (!w.points()[i].spent && w.points()[i].expires >= today) picks.push_back(i);
                if (picks.empty()) throw std::invalid_argument("no redeemable points held");
            }
            auto ch = open_channel(redeem_args);
            auto summary = wire::redeem(w, ch, picks);
            w.save(redeem_args.wallet_path);
            json gj = json::array();
            for (const auto& s : summary.group_status) gj.push_back(s);
            emit(redeem_args,
                 json{{"credited", summary.credited},
                      {"all_accepted", summary.all_accepted},
                      {"groups", gj}},
                 "redeemed " + std::to_string(summary.credited) + " points\n");
            return summary.all_accepted ? 0 : kExitProtocol;
        }

        if (personas->parsed()) {
            auto w = program::Wallet::load(personas_args.wallet_path);
            json pj = json::object();
            std::ostringstream human;
            for (const auto& [name, y] : w.personas()) {
                auto yb = core::scalar_to_bytes(y);
                pj[name] = base64url_encode(yb);
                human << name << "  y=" << to_hex(std::span<const uint8_t>(yb.data(), 6)) << "…\n";
            }
            emit(personas_args, json{{"personas", pj}}, human.str());
            return 0;
        }

        if (bench_cmd->parsed()) {
            auto params = core::setup(128);
            auto report = bench::run_bench(params, bench_samples);
            if (bench_json)
                std::cout << report.to_json().dump(2) << "\n";
            else
                std::cout << report.to_table();
            return 0;
        }
    } catch (const net::NetError& e) {
        std::cerr << "network error: " << e.what() << "\n";
        return kExitNetwork;
    } catch (const wire::WireError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLocal;
    }
    return 2;
}
