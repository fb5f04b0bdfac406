#pragma once

#include <atomic>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sosim/server/session.hpp"

namespace sosim::server {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  SessionOptions session;
  std::string log_path;     // run log, written as it grows
  std::string metrics_out;  // series CSV written on shutdown
};

/// NDJSON over TCP; a connection that opens with an HTTP upgrade request
/// speaks the same messages as websocket text frames instead. One owner
/// thread runs the session, one thread serves each connection.
class TcpServer {
 public:
  TcpServer(const RunConfig& config, ServerOptions options);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }
  /// Serves until stop(); then writes the end record and metrics file.
  void run();
  /// Safe from any thread and from a signal handler.
  void stop() { stopping_ = true; }

 private:
  struct Connection;

  void accept_ready();
  void serve(std::shared_ptr<Connection> conn);
  void owner_pass(bool& busy);

  ServerOptions options_;
  std::mutex mutex_;  // guards session_ and connections_
  Session session_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::vector<std::thread> threads_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::unique_ptr<std::ofstream> log_;
};

}  // namespace sosim::server
