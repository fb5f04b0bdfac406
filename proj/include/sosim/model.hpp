#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sosim/world.hpp"

namespace sosim {

enum class ParamType { integer, real, boolean, choice };
std::string_view to_string(ParamType t);

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::real;
  double min = 0;
  double max = 0;
  double default_value = 0;
  /// Live parameters apply at the next tick; the rest at the next setup.
  bool live = false;
  std::vector<std::string> choices;  // ParamType::choice; value is the index
  std::string doc;
};

/// Validated parameter values for one model, keyed by name.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<ParamSpec> specs);

  const std::vector<ParamSpec>& specs() const { return specs_; }
  const ParamSpec& spec(std::string_view name) const;
  bool has(std::string_view name) const;

  double get(std::string_view name) const;
  int get_int(std::string_view name) const { return static_cast<int>(get(name)); }
  bool get_bool(std::string_view name) const { return get(name) != 0; }
  const std::string& get_choice(std::string_view name) const;

  /// Throws ConfigError for unknown names, wrong types and out-of-range values.
  void set(std::string_view name, double value);
  /// Accepts numbers, booleans, and choice labels.
  void set_json(std::string_view name, const nlohmann::json& value);
  void apply_json(const nlohmann::json& object);

  nlohmann::json to_json() const;

 private:
  std::vector<ParamSpec> specs_;
  std::map<std::string, double, std::less<>> values_;
};

/// A model's per-instance state. install() runs once and registers
/// behaviors and reporters (the ParamSet reference stays valid and reflects
/// live updates); setup() runs after each clear_all.
class Model {
 public:
  virtual ~Model() = default;
  virtual void install(World& world, const ParamSet& params) = 0;
  virtual void setup(World& world, const ParamSet& params) = 0;
};

struct ModelInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  std::function<std::unique_ptr<Model>()> make;

  ParamSet default_params() const { return ParamSet(params); }
};

const std::vector<ModelInfo>& model_catalog();
/// Throws ConfigError for unknown names.
const ModelInfo& find_model(std::string_view name);

/// JSON config: {world:{width,height,wrap,seed,max_ticks}, model, params}.
struct RunConfig {
  WorldConfig world;
  std::string model;
  nlohmann::json params = nlohmann::json::object();

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

WorldConfig world_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const WorldConfig& config);

/// One model instance driving one World. Not movable: the model keeps
/// references into it.
class Simulation {
 public:
  Simulation(const ModelInfo& info, WorldConfig config, ParamSet params);
  explicit Simulation(const RunConfig& config);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// clear_all, apply deferred params, then the model's setup.
  void setup();
  TickReport step();
  /// Whether max_ticks (if any) has been reached.
  bool finished() const;

  enum class ParamApply { now, deferred };
  ParamApply set_param(std::string_view name, double value);
  ParamApply set_param_json(std::string_view name, const nlohmann::json& value);

  World& world() { return world_; }
  const World& world() const { return world_; }
  const ParamSet& params() const { return active_; }
  const ModelInfo& info() const { return *info_; }
  bool is_setup() const { return is_setup_; }

 private:
  const ModelInfo* info_;
  World world_;
  ParamSet active_;
  ParamSet pending_;
  std::unique_ptr<Model> model_;
  bool is_setup_ = false;
};

/// Runs setup then `ticks` steps (or until max_ticks), returning the series.
Series run_model(const RunConfig& config, std::int64_t ticks);

}  // namespace sosim
