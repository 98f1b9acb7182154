#pragma once

#include <atomic>
#include <fstream>
#include <thread>

#include "loyalty/net.hpp"
#include "loyalty/program.hpp"

namespace loyalty::wire {

using nlohmann::json;
using program::Vendor;
using program::Wallet;

constexpr int kProtocolVersion = 1;

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Verbatim NDJSON log of every message a vendor daemon sees; the
// anonymity assertions scan it.
class TranscriptLog {
  public:
    explicit TranscriptLog(const std::string& path);
    void record(uint64_t session, const char* dir, const std::string& raw);

  private:
    std::mutex mu_;
    std::ofstream out_;
};

// Per-connection protocol state machine: each session executes exactly
// one protocol (issue, submit or redeem); the bundle read is free.
class VendorSession {
  public:
    explicit VendorSession(Vendor& vendor) : vendor_(vendor) {}

    struct Reply {
        std::string line;
        bool close = false;
    };
    Reply handle(const std::string& line);

  private:
    json dispatch(const json& msg);

    enum class Phase { start, issue_offered, await_point_sign, done };
    Vendor& vendor_;
    Phase phase_ = Phase::start;
    std::vector<std::string> pending_point_cs_;
};

// Vendor daemon: one thread per connection over newline-delimited JSON.
class Daemon {
  public:
    Daemon(Vendor& vendor, const std::string& host, uint16_t port,
           TranscriptLog* transcript = nullptr);
    ~Daemon();

    uint16_t port() const { return listener_.port(); }
    void stop();

  private:
    void accept_loop();
    void serve_connection(net::Socket sock, uint64_t session_id);

    Vendor& vendor_;
    TranscriptLog* transcript_;
    net::Listener listener_;
    std::atomic<bool> stopping_{false};
    std::atomic<uint64_t> next_session_{1};
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::vector<std::thread> conn_threads_;
};

// One request/reply exchange on an open session.
class Channel {
  public:
    virtual ~Channel() = default;
    virtual json request(const json& msg) = 0;
};

// Client side over TCP; one instance per protocol session.
class TcpChannel final : public Channel {
  public:
    TcpChannel(const std::string& host, uint16_t port);
    json request(const json& msg) override;

  private:
    net::Socket sock_;
};

// Same state machine without sockets; tests and local tools use it.
class LocalChannel final : public Channel {
  public:
    explicit LocalChannel(Vendor& vendor) : session_(vendor) {}
    json request(const json& msg) override;

  private:
    VendorSession session_;
    bool closed_ = false;
};

// ---- client operations ----

program::VendorBundle fetch_bundle(Channel& ch);

// Full Use protocol: offer, blind, sign, unblind, verify. persona ==
// nullopt picks a throwaway y. Returns a copy of the stored purchase.
program::Purchase buy(Wallet& wallet, Channel& ch, const std::string& product,
                      const std::optional<std::string>& persona, RandomSource& rng);

struct ClaimSpec {
    uint64_t purchase_id = 0;
    size_t level = 0;  // generalization level l: 0 = exact product
};

struct SubmitSummary {
    std::vector<program::ClaimResult> claims;
    long long award = 0;
    size_t points_received = 0;
};

// Submit + in-session point issuance.
SubmitSummary submit(Wallet& wallet, Channel& ch, const std::vector<ClaimSpec>& claims,
                     RandomSource& rng);

struct RedeemSummary {
    long long credited = 0;
    bool all_accepted = false;
    std::vector<std::string> group_status;
};

// Redeem the given wallet point indexes (aggregating same-c groups).
RedeemSummary redeem(Wallet& wallet, Channel& ch, const std::vector<size_t>& point_indexes);

// Pick unspent, unexpired points summing exactly to `target`.
std::optional<std::vector<size_t>> choose_points(const Wallet& wallet, long long target,
                                                 const std::string& today);

}  // namespace loyalty::wire
