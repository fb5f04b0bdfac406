#include "sosim/server/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <sstream>

#include "sosim/error.hpp"

namespace sosim::server::ws {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxPayload = 16u << 20;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string frame_header(Opcode opcode, std::size_t n, bool masked) {
  std::string h;
  h += static_cast<char>(0x80 | static_cast<std::uint8_t>(opcode));
  const std::uint8_t mask_bit = masked ? 0x80 : 0;
  if (n < 126) {
    h += static_cast<char>(mask_bit | n);
  } else if (n <= 0xFFFF) {
    h += static_cast<char>(mask_bit | 126);
    h += static_cast<char>(n >> 8);
    h += static_cast<char>(n & 0xFF);
  } else {
    h += static_cast<char>(mask_bit | 127);
    for (int shift = 56; shift >= 0; shift -= 8) h += static_cast<char>((static_cast<std::uint64_t>(n) >> shift) & 0xFF);
  }
  return h;
}

}  // namespace

std::string accept_key(std::string_view client_key) {
  const std::string input = std::string(client_key) + std::string(kGuid);
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

std::optional<std::string> upgrade_key(std::string_view request) {
  std::istringstream in{std::string(request)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("GET ", 0) != 0) return std::nullopt;
  std::optional<std::string> key;
  bool upgrade = false;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) break;
    const auto colon = t.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string name = lower(trim(t.substr(0, colon)));
    const auto value = trim(t.substr(colon + 1));
    if (name == "sec-websocket-key") key = std::string(value);
    if (name == "upgrade" && lower(value) == "websocket") upgrade = true;
  }
  if (!upgrade) return std::nullopt;
  return key;
}

std::string handshake_response(std::string_view client_key) {
  return "HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         "Sec-WebSocket-Accept: " +
         accept_key(client_key) + "\r\n\r\n";
}

std::string encode(Opcode opcode, std::string_view payload) {
  return frame_header(opcode, payload.size(), false) + std::string(payload);
}

std::string encode_masked(Opcode opcode, std::string_view payload, std::uint32_t mask) {
  std::string out = frame_header(opcode, payload.size(), true);
  const char key[4] = {static_cast<char>(mask >> 24), static_cast<char>(mask >> 16), static_cast<char>(mask >> 8),
                       static_cast<char>(mask)};
  out.append(key, 4);
  for (std::size_t i = 0; i < payload.size(); ++i) out += static_cast<char>(payload[i] ^ key[i % 4]);
  return out;
}

std::optional<Frame> Decoder::next() {
  while (true) {
    if (buffer_.size() < 2) return std::nullopt;
    const auto b0 = static_cast<std::uint8_t>(buffer_[0]);
    const auto b1 = static_cast<std::uint8_t>(buffer_[1]);
    if (b0 & 0x70) throw Error("websocket: reserved bits set");
    const bool fin = b0 & 0x80;
    const auto opcode = static_cast<Opcode>(b0 & 0x0F);
    const bool masked = b1 & 0x80;
    std::size_t pos = 2;
    std::uint64_t n = b1 & 0x7F;
    if (n == 126) {
      if (buffer_.size() < 4) return std::nullopt;
      n = (static_cast<std::uint8_t>(buffer_[2]) << 8) | static_cast<std::uint8_t>(buffer_[3]);
      pos = 4;
    } else if (n == 127) {
      if (buffer_.size() < 10) return std::nullopt;
      n = 0;
      for (int i = 0; i < 8; ++i) n = (n << 8) | static_cast<std::uint8_t>(buffer_[2 + i]);
      pos = 10;
    }
    if (n > kMaxPayload) throw Error("websocket: frame too large");
    char key[4] = {0, 0, 0, 0};
    if (masked) {
      if (buffer_.size() < pos + 4) return std::nullopt;
      std::copy_n(buffer_.begin() + static_cast<std::ptrdiff_t>(pos), 4, key);
      pos += 4;
    }
    if (buffer_.size() < pos + n) return std::nullopt;
    std::string payload = buffer_.substr(pos, n);
    buffer_.erase(0, pos + n);
    if (masked)
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ key[i % 4]);

    switch (opcode) {
      case Opcode::close:
      case Opcode::ping:
      case Opcode::pong:
        if (!fin) throw Error("websocket: fragmented control frame");
        return Frame{opcode, true, std::move(payload)};
      case Opcode::text:
      case Opcode::binary:
        if (partial_) throw Error("websocket: new message inside a fragmented one");
        if (fin) return Frame{opcode, true, std::move(payload)};
        partial_ = Frame{opcode, false, std::move(payload)};
        break;
      case Opcode::continuation:
        if (!partial_) throw Error("websocket: continuation without a message");
        partial_->payload += payload;
        if (partial_->payload.size() > kMaxPayload) throw Error("websocket: message too large");
        if (fin) {
          Frame done = std::move(*partial_);
          done.fin = true;
          partial_.reset();
          return done;
        }
        break;
      default:
        throw Error("websocket: unknown opcode");
    }
  }
}

}  // namespace sosim::server::ws
