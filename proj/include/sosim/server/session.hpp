#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sosim/model.hpp"
#include "sosim/server/protocol.hpp"

namespace sosim::server {

using ClientId = std::uint32_t;

struct SessionOptions {
  double frame_rate = 20;  // frames per second while running; 0 = every tick
  double tick_rate = 60;   // ticks per second while running; 0 = unthrottled
};

/// Seconds on some monotonic scale. Injectable so throttling is testable.
using Clock = std::function<double()>;
Clock steady_clock();

/// The deterministic core of the live-steering service: one simulation,
/// any number of clients, at most one controller. Not thread-safe; the
/// transport serializes calls.
class Session {
 public:
  Session(const RunConfig& config, SessionOptions options = {}, Clock clock = steady_clock());

  /// Registers a client and queues its schema message.
  ClientId connect();
  void disconnect(ClientId client);

  /// Accepts one protocol line. Malformed input is answered at once; valid
  /// messages wait for the next tick boundary (see pump).
  void receive(ClientId client, std::string_view line);

  /// At a tick boundary: applies queued messages in arrival order, then
  /// advances at most one tick if running and the tick clock allows.
  /// Returns whether anything changed.
  bool pump();

  /// Takes the lines queued for a client.
  std::vector<std::string> drain(ClientId client);

  bool running() const { return running_; }
  std::optional<ClientId> controller() const { return controller_; }
  Simulation& simulation() { return sim_; }
  const Simulation& simulation() const { return sim_; }

  /// JSON lines: a start record, then every setup, set-param, command and
  /// stop with the tick at which it took effect.
  const std::vector<json>& run_log() const { return log_; }
  /// Appends an end record with the current tick.
  void close_log();
  /// Also hands every log record to `sink` as it is written.
  void set_log_sink(std::function<void(const json&)> sink) { sink_ = std::move(sink); }

 private:
  struct Client {
    bool frames = true;
    bool metrics = true;
    std::optional<std::uint64_t> patches_sent;
    std::vector<std::string> outbox;
  };
  struct Pending {
    ClientId client;
    json message;
  };

  void apply(ClientId client, const json& message);
  void apply_control(ClientId client, const json& id, const json& message);
  void apply_set_param(ClientId client, const json& id, const json& message);
  void apply_command(ClientId client, const json& id, const json& message);
  bool claim(ClientId client, const json& id);
  void record(json entry);
  void advance();
  void send(ClientId client, const json& message);
  void send_frames();
  void send_metrics();

  RunConfig config_;
  SessionOptions options_;
  Clock clock_;
  Simulation sim_;
  std::map<ClientId, Client> clients_;
  ClientId next_client_ = 1;
  std::optional<ClientId> controller_;
  std::deque<Pending> pending_;
  bool running_ = false;
  double last_tick_time_ = -1e300;
  double last_frame_time_ = -1e300;
  bool frame_dirty_ = false;
  std::vector<json> log_;
  std::function<void(const json&)> sink_;
};

}  // namespace sosim::server
