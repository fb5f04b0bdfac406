#include "sosim/server/replay.hpp"

#include <sstream>

#include "sosim/console/interpreter.hpp"

namespace sosim::server {

std::vector<json> parse_run_log(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ConfigError("run log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<json> load_run_log(const std::string& path) { return parse_run_log(read_text_file(path)); }

Series replay(const std::vector<json>& log) {
  if (log.empty() || log.front().value("type", "") != "start") throw ConfigError("run log must begin with a start record");
  const json& start = log.front();
  RunConfig config;
  config.model = start.at("model").get<std::string>();
  config.world = world_config_from_json(start.at("world"));
  config.params = start.value("params", json::object());
  Simulation sim(config);

  for (std::size_t i = 1; i < log.size(); ++i) {
    const json& entry = log[i];
    const std::string type = entry.value("type", "");
    const auto tick = entry.at("tick").get<std::int64_t>();
    if (tick < sim.world().tick())
      throw ConfigError("run log record " + std::to_string(i + 1) + " goes back in time");
    while (sim.world().tick() < tick) sim.step();
    if (type == "setup") {
      try {
        sim.setup();
      } catch (const std::exception&) {
      }
    } else if (type == "set-param") {
      sim.set_param_json(entry.at("name").get<std::string>(), entry.at("value"));
    } else if (type == "command") {
      console::Interpreter interp(sim.world());
      try {
        interp.run(entry.at("text").get<std::string>());
      } catch (const std::exception&) {
        // failed live as well; partial effects are reproduced
      }
    } else if (type != "stop" && type != "end") {
      throw ConfigError("run log record " + std::to_string(i + 1) + ": unknown type " + type);
    }
  }
  return sim.world().series();
}

}  // namespace sosim::server
