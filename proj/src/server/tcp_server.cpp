#include "sosim/server/tcp_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>
#include <fstream>

#include "sosim/error.hpp"
#include "sosim/server/websocket.hpp"

namespace sosim::server {

struct TcpServer::Connection {
  int fd = -1;
  ClientId client = 0;
  std::mutex mutex;
  std::deque<std::string> outgoing;  // protocol lines
  bool websocket = false;
  std::atomic<bool> closed{false};
};

namespace {

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        pollfd p{fd, POLLOUT, 0};
        ::poll(&p, 1, 100);
        continue;
      }
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

TcpServer::TcpServer(const RunConfig& config, ServerOptions options)
    : options_(std::move(options)), session_(config, options_.session) {
  if (!options_.log_path.empty()) {
    log_ = std::make_unique<std::ofstream>(options_.log_path, std::ios::binary | std::ios::trunc);
    if (!*log_) throw IoError("cannot write " + options_.log_path);
    for (const auto& line : session_.run_log()) *log_ << line.dump() << '\n';
    log_->flush();
    session_.set_log_sink([this](const json& line) {
      *log_ << line.dump() << '\n';
      log_->flush();
    });
  }

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ConfigError("bad host address " + options_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw IoError("cannot listen on " + options_.host + ":" + std::to_string(options_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
  stopping_ = true;
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::run() {
  using namespace std::chrono_literals;
  while (!stopping_) {
    accept_ready();
    bool busy = false;
    owner_pass(busy);
    if (!busy) std::this_thread::sleep_for(1ms);
  }
  {
    std::lock_guard lock(mutex_);
    session_.close_log();
    if (!options_.metrics_out.empty()) export_csv(session_.simulation().world().series(), options_.metrics_out);
    for (auto& c : connections_) c->closed = true;
  }
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
}

void TcpServer::accept_ready() {
  pollfd p{listen_fd_, POLLIN, 0};
  if (::poll(&p, 1, 0) <= 0 || !(p.revents & POLLIN)) return;
  const int fd = ::accept(listen_fd_, nullptr, nullptr);
  if (fd < 0) return;
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  auto conn = std::make_shared<Connection>();
  conn->fd = fd;
  {
    std::lock_guard lock(mutex_);
    conn->client = session_.connect();
    connections_.push_back(conn);
  }
  threads_.emplace_back([this, conn] { serve(conn); });
}

void TcpServer::owner_pass(bool& busy) {
  std::lock_guard lock(mutex_);
  busy = session_.pump();
  for (auto it = connections_.begin(); it != connections_.end();) {
    auto& conn = *it;
    if (conn->closed) {
      session_.disconnect(conn->client);
      it = connections_.erase(it);
      continue;
    }
    auto lines = session_.drain(conn->client);
    if (!lines.empty()) {
      std::lock_guard out(conn->mutex);
      for (auto& l : lines) conn->outgoing.push_back(std::move(l));
    }
    ++it;
  }
}

void TcpServer::serve(std::shared_ptr<Connection> conn) {
  std::string inbox;
  ws::Decoder decoder;
  bool decided = false;
  char buf[4096];
  const auto opened = std::chrono::steady_clock::now();

  auto deliver = [&](std::string_view line) {
    std::lock_guard lock(mutex_);
    session_.receive(conn->client, line);
  };
  auto flush = [&]() -> bool {
    std::deque<std::string> batch;
    {
      std::lock_guard lock(conn->mutex);
      batch.swap(conn->outgoing);
    }
    for (const auto& line : batch) {
      const bool ok = conn->websocket
                          ? send_all(conn->fd, ws::encode(ws::Opcode::text, std::string_view(line).substr(0, line.size() - 1)))
                          : send_all(conn->fd, line);
      if (!ok) return false;
    }
    return true;
  };

  while (!conn->closed && !stopping_) {
    // nothing is written until the protocol is known, so a browser sees its handshake reply first
    if (!decided && inbox.empty() && std::chrono::steady_clock::now() - opened > std::chrono::milliseconds(150))
      decided = true;  // silent peer: a line client waiting for its schema
    if (decided && !flush()) break;
    pollfd p{conn->fd, POLLIN, 0};
    const int r = ::poll(&p, 1, 5);
    if (r < 0 && errno != EINTR) break;
    if (r <= 0) continue;
    const ssize_t n = ::recv(conn->fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    try {
      if (!decided) {
        inbox.append(buf, static_cast<std::size_t>(n));
        if (inbox.rfind("GET ", 0) == 0 || (inbox.size() < 4 && std::string_view("GET ").starts_with(inbox))) {
          const auto end = inbox.find("\r\n\r\n");
          if (end == std::string::npos) continue;
          const auto key = ws::upgrade_key(std::string_view(inbox).substr(0, end + 4));
          if (!key) {
            send_all(conn->fd, "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n");
            break;
          }
          if (!send_all(conn->fd, ws::handshake_response(*key))) break;
          conn->websocket = true;
          decoder.feed(std::string_view(inbox).substr(end + 4));
          inbox.clear();
        }
        decided = true;
      } else if (conn->websocket) {
        decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
      } else {
        inbox.append(buf, static_cast<std::size_t>(n));
      }
      if (conn->websocket) {
        bool closing = false;
        while (auto frame = decoder.next()) {
          if (frame->opcode == ws::Opcode::text || frame->opcode == ws::Opcode::binary) {
            deliver(frame->payload);
          } else if (frame->opcode == ws::Opcode::ping) {
            send_all(conn->fd, ws::encode(ws::Opcode::pong, frame->payload));
          } else if (frame->opcode == ws::Opcode::close) {
            send_all(conn->fd, ws::encode(ws::Opcode::close, {}));
            closing = true;
            break;
          }
        }
        if (closing) break;
      } else {
        std::size_t nl;
        while ((nl = inbox.find('\n')) != std::string::npos) {
          std::string line = inbox.substr(0, nl);
          inbox.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (!line.empty()) deliver(line);
        }
      }
    } catch (const Error&) {
      break;
    }
  }
  if (decided && !stopping_) flush();
  conn->closed = true;
  ::shutdown(conn->fd, SHUT_RDWR);
  ::close(conn->fd);
}

}  // namespace sosim::server
