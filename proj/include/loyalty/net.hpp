#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace loyalty::net {

struct NetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thin RAII socket wrapper for newline-delimited text protocols.
class Socket {
  public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket();
    Socket(Socket&& o) noexcept;
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

    // Read until '\n' (not included). nullopt on EOF or overlong line.
    std::optional<std::string> read_line(size_t max_len = 8 * 1024 * 1024);
    void write_line(const std::string& line);  // appends '\n'
    void shutdown_both();

  private:
    int fd_ = -1;
    std::string buf_;
};

class Listener {
  public:
    // host "127.0.0.1" etc.; port 0 picks an ephemeral port.
    Listener(const std::string& host, uint16_t port);
    ~Listener();
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    uint16_t port() const { return port_; }
    // Blocks; invalid Socket after close().
    Socket accept();
    void close();

  private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

Socket connect(const std::string& host, uint16_t port);

// "host:port" split helper.
std::pair<std::string, uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace loyalty::net
