#include "sosim/server/session.hpp"

#include <chrono>
#include <cmath>

#include "sosim/console/interpreter.hpp"

namespace sosim::server {

Clock steady_clock() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

Session::Session(const RunConfig& config, SessionOptions options, Clock clock)
    : config_(config), options_(options), clock_(std::move(clock)), sim_(config) {
  if (options_.frame_rate < 0 || options_.tick_rate < 0) throw ConfigError("rates must be non-negative");
  record({{"type", "start"},
          {"model", config_.model},
          {"world", to_json(config_.world)},
          {"params", sim_.params().to_json()}});
}

ClientId Session::connect() {
  const ClientId id = next_client_++;
  clients_[id];
  send(id, schema_message(sim_.info(), sim_.params(), sim_.world(), options_.frame_rate));
  return id;
}

void Session::disconnect(ClientId client) {
  clients_.erase(client);
  if (controller_ == client) controller_.reset();
  std::erase_if(pending_, [&](const Pending& p) { return p.client == client; });
}

void Session::receive(ClientId client, std::string_view line) {
  if (!clients_.contains(client)) return;
  json message;
  try {
    message = json::parse(line);
  } catch (const json::parse_error& e) {
    send(client, error_message(nullptr, std::string("malformed message: ") + e.what()));
    return;
  }
  if (!message.is_object()) {
    send(client, error_message(nullptr, "malformed message: expected a JSON object"));
    return;
  }
  const json id = message.value("id", json(nullptr));
  if (!message.contains("id")) {
    send(client, error_message(nullptr, "message needs an id"));
    return;
  }
  const std::string type = message.value("type", "");
  if (type == "subscribe") {
    const auto& channels = message.value("channels", json::array());
    if (!channels.is_array()) {
      send(client, error_message(id, "channels must be a list"));
      return;
    }
    auto& c = clients_[client];
    c.frames = c.metrics = false;
    for (const auto& ch : channels) {
      if (ch == "frames") {
        c.frames = true;
      } else if (ch == "metrics") {
        c.metrics = true;
      } else {
        send(client, error_message(id, "unknown channel " + ch.dump()));
        return;
      }
    }
    send(client, ack_message(id, "ok"));
    return;
  }
  if (type != "control" && type != "set-param" && type != "command") {
    send(client, error_message(id, type.empty() ? "message needs a type" : "unknown message type " + type));
    return;
  }
  pending_.push_back({client, std::move(message)});
}

bool Session::pump() {
  bool changed = false;
  while (!pending_.empty()) {
    Pending p = std::move(pending_.front());
    pending_.pop_front();
    apply(p.client, p.message);
    changed = true;
  }
  if (running_) {
    const double now = clock_();
    if (options_.tick_rate == 0 || now - last_tick_time_ >= 1.0 / options_.tick_rate) {
      last_tick_time_ = now;
      advance();
      changed = true;
    }
  }
  if (frame_dirty_) {
    const double now = clock_();
    if (options_.frame_rate == 0 || now - last_frame_time_ >= 1.0 / options_.frame_rate) {
      last_frame_time_ = now;
      send_frames();
    }
  }
  return changed;
}

std::vector<std::string> Session::drain(ClientId client) {
  auto it = clients_.find(client);
  if (it == clients_.end()) return {};
  return std::exchange(it->second.outbox, {});
}

void Session::close_log() { record({{"type", "end"}}); }

void Session::apply(ClientId client, const json& message) {
  if (!clients_.contains(client)) return;
  const json& id = message["id"];
  const std::string type = message["type"];
  if (type == "control") {
    apply_control(client, id, message);
  } else if (type == "set-param") {
    apply_set_param(client, id, message);
  } else {
    apply_command(client, id, message);
  }
}

bool Session::claim(ClientId client, const json& id) {
  if (!controller_) controller_ = client;
  if (*controller_ == client) return true;
  send(client, error_message(id, "another client controls this session"));
  return false;
}

void Session::apply_control(ClientId client, const json& id, const json& message) {
  const std::string action = message.value("action", "");
  if (action == "release") {
    if (controller_ == client) controller_.reset();
    send(client, ack_message(id, "ok"));
    return;
  }
  if (action != "setup" && action != "go" && action != "stop" && action != "step") {
    send(client, error_message(id, "unknown control action " + action));
    return;
  }
  if (!claim(client, id)) return;

  if (action == "setup") {
    running_ = false;
    try {
      sim_.setup();
    } catch (const std::exception& e) {
      record({{"type", "setup"}});
      send(client, error_message(id, std::string("setup failed: ") + e.what()));
      return;
    }
    record({{"type", "setup"}});
    send(client, ack_message(id, "ok"));
    send_frames();
  } else if (action == "go") {
    if (!sim_.is_setup()) {
      send(client, error_message(id, "setup first"));
    } else if (sim_.finished()) {
      send(client, error_message(id, "run finished; setup again"));
    } else {
      running_ = true;
      last_tick_time_ = -1e300;
      send(client, ack_message(id, "ok"));
    }
  } else if (action == "stop") {
    const bool was_running = running_;
    running_ = false;
    if (was_running) record({{"type", "stop"}});
    send(client, ack_message(id, "ok"));
    send_frames();
  } else {
    if (running_) {
      send(client, error_message(id, "stop first"));
      return;
    }
    if (!sim_.is_setup()) {
      send(client, error_message(id, "setup first"));
      return;
    }
    const json count = message.value("count", json(1));
    if (!count.is_number_integer() || count.get<std::int64_t>() < 1) {
      send(client, error_message(id, "step count must be a positive integer"));
      return;
    }
    const auto n = count.get<std::int64_t>();
    std::int64_t done = 0;
    for (; done < n && !sim_.finished(); ++done) {
      advance();
      if (!frame_dirty_) break;  // a behavior failed
      send_frames();
    }
    send(client, ack_message(id, "ok", "advanced " + std::to_string(done) + " ticks"));
  }
}

void Session::apply_set_param(ClientId client, const json& id, const json& message) {
  if (!claim(client, id)) return;
  const std::string name = message.value("name", "");
  if (!message.contains("value")) {
    send(client, error_message(id, "set-param needs a value"));
    return;
  }
  try {
    const auto applied = sim_.set_param_json(name, message["value"]);
    record({{"type", "set-param"}, {"name", name}, {"value", message["value"]}});
    send(client, ack_message(id, applied == Simulation::ParamApply::now ? "ok" : "deferred"));
  } catch (const std::exception& e) {
    send(client, error_message(id, e.what()));
  }
}

void Session::apply_command(ClientId client, const json& id, const json& message) {
  if (!claim(client, id)) return;
  const json& text = message.value("text", json(nullptr));
  if (!text.is_string()) {
    send(client, error_message(id, "command needs text"));
    return;
  }
  const std::string source = text.get<std::string>();
  // logged before it runs: a failing command may still have changed the world
  record({{"type", "command"}, {"text", source}});
  console::Interpreter interp(sim_.world());
  try {
    send(client, ack_message(id, "ok", interp.execute(source)));
  } catch (const console::ConsoleError& e) {
    send(client, error_message(id, e.describe(), e.span().line, e.span().column));
  } catch (const std::exception& e) {
    send(client, error_message(id, e.what()));
  }
  if (running_) {
    frame_dirty_ = true;
  } else {
    send_frames();
  }
}

void Session::record(json entry) {
  json line = {{"tick", sim_.world().tick()}};
  line.update(entry);
  log_.push_back(line);
  if (sink_) sink_(line);
}

void Session::advance() {
  try {
    sim_.step();
  } catch (const std::exception& e) {
    running_ = false;
    frame_dirty_ = false;
    record({{"type", "stop"}, {"reason", "error"}});
    for (auto& [id, c] : clients_) send(id, error_message(nullptr, std::string("tick failed: ") + e.what()));
    return;
  }
  send_metrics();
  frame_dirty_ = true;
  if (running_ && sim_.finished()) {
    running_ = false;
    record({{"type", "stop"}, {"reason", "finished"}});
    send_frames();
  }
}

void Session::send(ClientId client, const json& message) {
  auto it = clients_.find(client);
  if (it != clients_.end()) it->second.outbox.push_back(to_line(message));
}

void Session::send_frames() {
  frame_dirty_ = false;
  std::optional<std::string> full;
  for (auto& [id, c] : clients_) {
    if (!c.frames) continue;
    if (c.patches_sent) {
      c.outbox.push_back(encode_frame(sim_.world(), c.patches_sent));
    } else {
      if (!full) full = encode_frame(sim_.world(), std::nullopt);
      c.outbox.push_back(*full);
    }
    c.patches_sent = sim_.world().patch_revision();
  }
}

void Session::send_metrics() {
  std::optional<std::string> line;
  for (auto& [id, c] : clients_) {
    if (!c.metrics) continue;
    if (!line) line = to_line(metrics_message(sim_.world()));
    c.outbox.push_back(*line);
  }
}

}  // namespace sosim::server
