#include "sosim/model.hpp"

#include <cmath>

#include "sosim/error.hpp"
#include "sosim/series.hpp"

namespace sosim {

using nlohmann::json;

std::string_view to_string(ParamType t) {
  switch (t) {
    case ParamType::integer: return "int";
    case ParamType::real: return "real";
    case ParamType::boolean: return "bool";
    case ParamType::choice: return "choice";
  }
  return "?";
}

ParamSet::ParamSet(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
  for (const auto& s : specs_) values_[s.name] = s.default_value;
}

const ParamSpec& ParamSet::spec(std::string_view name) const {
  for (const auto& s : specs_)
    if (s.name == name) return s;
  throw ConfigError("unknown parameter " + std::string(name));
}

bool ParamSet::has(std::string_view name) const { return values_.find(name) != values_.end(); }

double ParamSet::get(std::string_view name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter " + std::string(name));
  return it->second;
}

const std::string& ParamSet::get_choice(std::string_view name) const {
  const auto& s = spec(name);
  return s.choices.at(static_cast<std::size_t>(get(name)));
}

void ParamSet::set(std::string_view name, double value) {
  const auto& s = spec(name);
  if (!std::isfinite(value)) throw ConfigError("parameter " + s.name + " must be finite");
  if (s.type != ParamType::real && value != std::floor(value))
    throw ConfigError("parameter " + s.name + " must be an integer");
  if (value < s.min || value > s.max)
    throw ConfigError("parameter " + s.name + " out of range [" + format_real(s.min) + ", " + format_real(s.max) + "]");
  values_[s.name] = value;
}

void ParamSet::set_json(std::string_view name, const json& value) {
  const auto& s = spec(name);
  if (value.is_boolean()) {
    set(name, value.get<bool>() ? 1.0 : 0.0);
  } else if (value.is_number()) {
    set(name, value.get<double>());
  } else if (value.is_string() && s.type == ParamType::choice) {
    const auto label = value.get<std::string>();
    for (std::size_t i = 0; i < s.choices.size(); ++i)
      if (s.choices[i] == label) return set(name, static_cast<double>(i));
    throw ConfigError("parameter " + s.name + " has no choice " + label);
  } else {
    throw ConfigError("parameter " + s.name + " has an unsupported value type");
  }
}

void ParamSet::apply_json(const json& object) {
  if (object.is_null()) return;
  if (!object.is_object()) throw ConfigError("params must be a JSON object");
  for (const auto& [k, v] : object.items()) set_json(k, v);
}

json ParamSet::to_json() const {
  json out = json::object();
  for (const auto& s : specs_) {
    const double v = get(s.name);
    switch (s.type) {
      case ParamType::integer: out[s.name] = static_cast<long long>(v); break;
      case ParamType::boolean: out[s.name] = v != 0; break;
      case ParamType::choice: out[s.name] = s.choices.at(static_cast<std::size_t>(v)); break;
      case ParamType::real: out[s.name] = v; break;
    }
  }
  return out;
}

const ModelInfo& find_model(std::string_view name) {
  for (const auto& m : model_catalog())
    if (m.name == name) return m;
  throw ConfigError("unknown model " + std::string(name));
}

WorldConfig world_config_from_json(const json& doc) {
  WorldConfig c;
  if (doc.is_null()) return c;
  if (!doc.is_object()) throw ConfigError("world must be a JSON object");
  try {
    c.width = doc.value("width", c.width);
    c.height = doc.value("height", c.height);
    c.wrap = doc.value("wrap", c.wrap);
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("max_ticks") && !doc["max_ticks"].is_null()) c.max_ticks = doc["max_ticks"].get<std::int64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("world: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const WorldConfig& c) {
  json w = {{"width", c.width}, {"height", c.height}, {"wrap", c.wrap}, {"seed", c.seed}};
  w["max_ticks"] = c.max_ticks ? json(*c.max_ticks) : json(nullptr);
  return w;
}

RunConfig RunConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig rc;
  rc.world = world_config_from_json(doc.value("world", json(nullptr)));
  rc.model = doc.value("model", std::string{});
  if (doc.contains("params")) rc.params = doc["params"];
  return rc;
}

RunConfig RunConfig::load(const std::string& path) {
  try {
    return from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json RunConfig::to_json() const { return {{"world", sosim::to_json(world)}, {"model", model}, {"params", params}}; }

Simulation::Simulation(const ModelInfo& info, WorldConfig config, ParamSet params)
    : info_(&info), world_(config), active_(std::move(params)), pending_(active_), model_(info.make()) {
  model_->install(world_, active_);
}

namespace {
ParamSet params_for(const RunConfig& config) {
  ParamSet p = find_model(config.model).default_params();
  p.apply_json(config.params);
  return p;
}
}  // namespace

Simulation::Simulation(const RunConfig& config)
    : Simulation(find_model(config.model), config.world, params_for(config)) {}

void Simulation::setup() {
  active_ = pending_;
  world_.clear_all();
  model_->setup(world_, active_);
  is_setup_ = true;
}

TickReport Simulation::step() { return world_.step(); }

bool Simulation::finished() const {
  const auto& max = world_.config().max_ticks;
  return max && world_.tick() >= *max;
}

Simulation::ParamApply Simulation::set_param(std::string_view name, double value) {
  const auto& s = pending_.spec(name);
  pending_.set(name, value);
  if (!s.live) return ParamApply::deferred;
  active_.set(name, value);
  return ParamApply::now;
}

Simulation::ParamApply Simulation::set_param_json(std::string_view name, const json& value) {
  ParamSet probe = pending_;
  probe.set_json(name, value);
  return set_param(name, probe.get(name));
}

Series run_model(const RunConfig& config, std::int64_t ticks) {
  Simulation sim(config);
  sim.setup();
  for (std::int64_t t = 0; t < ticks && !sim.finished(); ++t) sim.step();
  return sim.world().series();
}

}  // namespace sosim
