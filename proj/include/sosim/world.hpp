#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sosim/rng.hpp"
#include "sosim/series.hpp"

namespace sosim {

using AgentId = std::uint32_t;

struct Vec2 {
  double x = 0;
  double y = 0;
  bool operator==(const Vec2&) const = default;
};

struct WorldConfig {
  int width = 33;
  int height = 33;
  bool wrap = true;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> max_ticks;

  /// Throws ConfigError on non-positive dimensions.
  void validate() const;
};

enum class AgentState { free, locked, head, member, undecided };
std::string_view to_string(AgentState s);

using VarMap = std::map<std::string, double, std::less<>>;

struct Agent {
  AgentId id = 0;
  std::string breed;
  Vec2 pos;
  double heading = 0;  // degrees, 0 = north, clockwise
  double color = 0;    // [0, 140)
  AgentState state = AgentState::free;
  VarMap vars;
  bool alive = true;

  /// Throws EvalError("unknown variable <name>") when unset.
  double var(std::string_view name) const;
  bool has_var(std::string_view name) const;
  void set_var(std::string_view name, double value);
};

struct Patch {
  int pxcor = 0;
  int pycor = 0;
  double pcolor = 0;
  VarMap vars;
  std::uint64_t revision = 0;  // world patch revision of the last pcolor change
};

struct Link {
  AgentId a = 0;  // a < b
  AgentId b = 0;
  double weight = 1;
};

struct BehaviorTiming {
  std::string name;
  std::chrono::nanoseconds elapsed{0};
};

struct TickReport {
  std::int64_t tick = 0;
  std::vector<BehaviorTiming> timings;
  std::vector<double> counters;  // reporter values, registration order
};

/// The whole simulated world: patch grid, agents, links, globals, the tick
/// counter and the random streams. Owned by one execution context.
class World {
 public:
  using Behavior = std::function<void(World&)>;
  using Reporter = std::function<double(const World&)>;

  explicit World(WorldConfig config = {});

  const WorldConfig& config() const { return config_; }
  std::int64_t tick() const { return tick_; }

  // Geometry. Continuous bounds are [-width/2, width/2) x [-height/2, height/2).
  double min_x() const { return -config_.width / 2.0; }
  double max_x() const { return config_.width / 2.0; }
  double min_y() const { return -config_.height / 2.0; }
  double max_y() const { return config_.height / 2.0; }
  int min_pxcor() const { return -(config_.width / 2); }
  int max_pxcor() const { return min_pxcor() + config_.width - 1; }
  int min_pycor() const { return -(config_.height / 2); }
  int max_pycor() const { return min_pycor() + config_.height - 1; }

  /// Folds a point into the world (torus) or clamps it (bounded world).
  Vec2 normalize(Vec2 p) const;
  double distance(Vec2 p, Vec2 q) const;

  // Agents.
  std::vector<AgentId> create_agents(std::string_view breed, std::size_t count,
                                     const std::function<void(Agent&)>& init = {});
  bool alive(AgentId id) const { return id < agents_.size() && agents_[id].alive; }
  Agent& agent(AgentId id);
  const Agent& agent(AgentId id) const;
  /// Every agent ever created this run, indexed by id; dead ones have alive=false.
  std::span<const Agent> agents() const { return agents_; }
  std::size_t agent_count() const { return live_count_; }
  std::size_t agent_count(std::string_view breed) const;
  void kill(AgentId id);

  Vec2 move_forward(AgentId id, double step);
  double turn(AgentId id, double delta);
  void set_heading(AgentId id, double heading);
  void set_position(AgentId id, Vec2 p);
  void set_color(AgentId id, double color);

  // Breeds. Singular names are stored on agents; plural names address sets.
  void declare_breed(std::string singular, std::string plural);
  bool breeds_closed() const { return breeds_closed_; }
  void set_breeds_closed(bool closed) { breeds_closed_ = closed; }
  bool has_breed(std::string_view singular) const;
  std::optional<std::string> breed_for_plural(std::string_view plural) const;

  // Patches.
  std::span<Patch> patches() { return patches_; }
  std::span<const Patch> patches() const { return patches_; }
  Patch& patch_at(int pxcor, int pycor);
  const Patch& patch_at(int pxcor, int pycor) const;
  Patch& patch_under(Vec2 p);
  void set_pcolor(Patch& patch, double color);
  std::uint64_t patch_revision() const { return patch_revision_; }

  // Links.
  /// Returns false (no change) for self-links or an existing pair.
  bool create_link(AgentId a, AgentId b, double weight = 1);
  bool has_link(AgentId a, AgentId b) const;
  std::span<const AgentId> link_neighbors(AgentId id) const;
  const std::map<std::pair<AgentId, AgentId>, Link>& links() const { return links_; }

  // Globals.
  bool has_global(std::string_view name) const;
  double global(std::string_view name) const;
  void set_global(std::string_view name, double value);
  const VarMap& globals() const { return globals_; }

  /// The stream for the current context: a behavior's (behavior, tick)
  /// substream while it runs, the observer stream otherwise.
  Rng& rng() { return active_rng_ != nullptr ? *active_rng_ : observer_rng_; }
  Rng& observer_rng() { return observer_rng_; }

  // Execution cycle.
  void add_behavior(std::string name, Behavior fn);
  void register_reporter(std::string name, Reporter fn);
  const Series& series() const { return series_; }
  std::vector<double> sample_reporters() const;
  TickReport step();

  /// Removes agents, links, globals and recorded series, resets patches and
  /// the tick, and reseeds the observer stream. Behaviors and reporters stay.
  void clear_all();

  /// Canonical text of the observable state (agents by id, reals at 17
  /// significant digits).
  std::string canonical_dump() const;
  std::uint64_t digest() const;

 private:
  void reset_patches();
  std::size_t patch_index(int pxcor, int pycor) const;

  WorldConfig config_;
  std::int64_t tick_ = 0;
  std::vector<Agent> agents_;
  std::size_t live_count_ = 0;
  std::vector<Patch> patches_;
  std::uint64_t patch_revision_ = 0;
  std::map<std::pair<AgentId, AgentId>, Link> links_;
  std::vector<std::vector<AgentId>> adjacency_;
  VarMap globals_;
  std::vector<std::pair<std::string, std::string>> breeds_;  // singular, plural
  bool breeds_closed_ = true;

  Rng observer_rng_;
  Rng* active_rng_ = nullptr;

  std::vector<std::pair<std::string, Behavior>> behaviors_;
  std::vector<std::pair<std::string, Reporter>> reporters_;
  Series series_;
};

/// sin/cos of a Logo heading, exact at multiples of 90 degrees.
double heading_dx(double heading_deg);
double heading_dy(double heading_deg);

}  // namespace sosim
