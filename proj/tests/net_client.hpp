#pragma once
// Minimal blocking clients for driving a live server from tests.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sosim/server/websocket.hpp"

namespace testnet {

class LineClient {
 public:
  explicit LineClient(int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw std::runtime_error("connect failed");
  }
  ~LineClient() { ::close(fd_); }
  LineClient(const LineClient&) = delete;

  void send_raw(std::string_view bytes) {
    while (!bytes.empty()) {
      const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n <= 0) throw std::runtime_error("send failed");
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }
  void send(const nlohmann::json& m) { send_raw(m.dump() + "\n"); }

  /// Next line, or nullopt after `timeout_ms` without one.
  std::optional<std::string> line(int timeout_ms = 5000) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string out = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return out;
      }
      if (!fill(deadline)) return std::nullopt;
    }
  }
  std::optional<nlohmann::json> message(int timeout_ms = 5000) {
    auto l = line(timeout_ms);
    if (!l) return std::nullopt;
    return nlohmann::json::parse(*l);
  }
  /// Skips messages until one of `type` (and matching id, when given) arrives.
  nlohmann::json expect(const std::string& type, const nlohmann::json& id = nullptr, int timeout_ms = 5000) {
    while (auto m = message(timeout_ms)) {
      if ((*m)["type"] == "error" && type != "error" && (id.is_null() || (*m)["id"] == id))
        throw std::runtime_error("server error: " + m->dump());
      if ((*m)["type"] == type && (id.is_null() || (*m)["id"] == id)) return *m;
    }
    throw std::runtime_error("timed out waiting for " + type);
  }

 protected:
  bool fill(std::chrono::steady_clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return false;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) return false;
    char tmp[65536];
    const auto n = ::recv(fd_, tmp, sizeof tmp, 0);
    if (n <= 0) return false;
    buf_.append(tmp, static_cast<std::size_t>(n));
    return true;
  }

  int fd_ = -1;
  std::string buf_;
};

/// Same protocol through the browser socket upgrade.
class WsClient : public LineClient {
 public:
  explicit WsClient(int port) : LineClient(port) {
    send_raw(
        "GET / HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
        "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (buf_.find("\r\n\r\n") == std::string::npos)
      if (!fill(deadline)) throw std::runtime_error("no handshake reply");
    const auto end = buf_.find("\r\n\r\n");
    response = buf_.substr(0, end);
    decoder_.feed(std::string_view(buf_).substr(end + 4));
    buf_.clear();
  }
  void send(const nlohmann::json& m) { send_raw(sosim::server::ws::encode_masked(sosim::server::ws::Opcode::text, m.dump(), 0x1234abcd)); }
  std::optional<nlohmann::json> message(int timeout_ms = 5000) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
      if (auto f = decoder_.next()) return nlohmann::json::parse(f->payload);
      if (!fill(deadline)) return std::nullopt;
      decoder_.feed(buf_);
      buf_.clear();
    }
  }

  std::string response;

 private:
  sosim::server::ws::Decoder decoder_;
};

}  // namespace testnet
