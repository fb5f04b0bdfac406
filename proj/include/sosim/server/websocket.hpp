#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sosim::server::ws {

/// Sec-WebSocket-Accept for a client key.
std::string accept_key(std::string_view client_key);

/// The Sec-WebSocket-Key of a complete HTTP upgrade request (headers up to
/// the blank line), or std::nullopt when it is not one.
std::optional<std::string> upgrade_key(std::string_view request);
std::string handshake_response(std::string_view client_key);

enum class Opcode : std::uint8_t { continuation = 0, text = 1, binary = 2, close = 8, ping = 9, pong = 10 };

struct Frame {
  Opcode opcode = Opcode::text;
  bool fin = true;
  std::string payload;
};

/// Server-to-client frames are never masked.
std::string encode(Opcode opcode, std::string_view payload);
/// Client-style masked frame, for tests and scripted clients.
std::string encode_masked(Opcode opcode, std::string_view payload, std::uint32_t mask);

/// Incremental decoder; reassembles fragmented messages.
class Decoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  /// Next complete message (control frames are returned as they arrive).
  /// Throws Error on a protocol violation.
  std::optional<Frame> next();

 private:
  std::string buffer_;
  std::optional<Frame> partial_;
};

}  // namespace sosim::server::ws
