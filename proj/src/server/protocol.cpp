#include "sosim/server/protocol.hpp"

namespace sosim::server {

std::string to_line(const json& message) {
  std::string s = message.dump();
  s += '\n';
  return s;
}

namespace {

std::string_view type_name(ParamType t) {
  switch (t) {
    case ParamType::integer: return "integer";
    case ParamType::real: return "real";
    case ParamType::boolean: return "boolean";
    case ParamType::choice: return "choice";
  }
  return "real";
}

json reporter_values(const World& world) {
  json values = json::object();
  const auto& names = world.series().names;
  const auto sample = world.sample_reporters();
  for (std::size_t i = 0; i < names.size(); ++i) values[names[i]] = sample[i];
  return values;
}

}  // namespace

json schema_message(const ModelInfo& info, const ParamSet& params, const World& world, double frame_rate) {
  json ps = json::array();
  for (const auto& spec : info.params) {
    json p = {{"name", spec.name},   {"type", type_name(spec.type)}, {"live", spec.live},
              {"default", spec.default_value}, {"value", params.to_json().at(spec.name)}, {"doc", spec.doc}};
    if (spec.type == ParamType::integer || spec.type == ParamType::real) {
      p["min"] = spec.min;
      p["max"] = spec.max;
    }
    if (spec.type == ParamType::choice) p["choices"] = spec.choices;
    ps.push_back(std::move(p));
  }
  const auto& cfg = world.config();
  return {{"type", "schema"},
          {"model", info.name},
          {"summary", info.summary},
          {"params", std::move(ps)},
          {"metrics", world.series().names},
          {"world", {{"width", cfg.width}, {"height", cfg.height}, {"wrap", cfg.wrap}, {"seed", cfg.seed}}},
          {"frame_rate", frame_rate}};
}

json ack_message(const json& id, std::string_view status, const std::string& result) {
  json m = {{"type", "ack"}, {"id", id}, {"status", status}};
  if (!result.empty()) m["result"] = result;
  return m;
}

json error_message(const json& id, const std::string& message) {
  return {{"type", "error"}, {"id", id}, {"message", message}};
}

json error_message(const json& id, const std::string& message, int line, int column) {
  json m = error_message(id, message);
  m["line"] = line;
  m["column"] = column;
  return m;
}

json metrics_message(const World& world) {
  return {{"type", "metrics"}, {"tick", world.tick()}, {"values", reporter_values(world)}};
}

json frame_message(const World& world, std::optional<std::uint64_t> patches_since) {
  json agents = json::array();
  for (const auto& a : world.agents()) {
    if (!a.alive) continue;
    agents.push_back({{"id", a.id},
                      {"breed", a.breed},
                      {"x", a.pos.x},
                      {"y", a.pos.y},
                      {"heading", a.heading},
                      {"color", a.color},
                      {"state", to_string(a.state)}});
  }
  json links = json::array();
  for (const auto& [key, link] : world.links()) links.push_back({link.a, link.b});
  json patches = json::array();
  for (const auto& p : world.patches()) {
    if (patches_since && p.revision <= *patches_since) continue;
    patches.push_back({p.pxcor, p.pycor, p.pcolor});
  }
  return {{"type", "frame"},
          {"tick", world.tick()},
          {"agents", std::move(agents)},
          {"links", std::move(links)},
          {"patches", std::move(patches)},
          {"patch_revision", world.patch_revision()},
          {"metrics", reporter_values(world)}};
}

std::string encode_frame(const World& world, std::optional<std::uint64_t> patches_since) {
  return to_line(frame_message(world, patches_since));
}

}  // namespace sosim::server
