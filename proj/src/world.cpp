#include "sosim/world.hpp"

#include <algorithm>
#include <cmath>

#include "sosim/colors.hpp"
#include "sosim/error.hpp"

namespace sosim {

std::string_view to_string(AgentState s) {
  switch (s) {
    case AgentState::free: return "free";
    case AgentState::locked: return "locked";
    case AgentState::head: return "head";
    case AgentState::member: return "member";
    case AgentState::undecided: return "undecided";
  }
  return "?";
}

void WorldConfig::validate() const {
  if (width < 1 || height < 1)
    throw ConfigError("world dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  if (max_ticks && *max_ticks < 0) throw ConfigError("max_ticks must be non-negative");
}

double Agent::var(std::string_view name) const {
  auto it = vars.find(name);
  if (it == vars.end()) throw EvalError("unknown variable " + std::string(name));
  return it->second;
}

bool Agent::has_var(std::string_view name) const { return vars.find(name) != vars.end(); }

void Agent::set_var(std::string_view name, double value) {
  auto it = vars.find(name);
  if (it == vars.end())
    vars.emplace(std::string(name), value);
  else
    it->second = value;
}

double heading_dx(double h) {
  if (h == 0 || h == 180) return 0;
  if (h == 90) return 1;
  if (h == 270) return -1;
  return std::sin(h * M_PI / 180.0);
}

double heading_dy(double h) {
  if (h == 90 || h == 270) return 0;
  if (h == 0) return 1;
  if (h == 180) return -1;
  return std::cos(h * M_PI / 180.0);
}

namespace {
double wrap_heading(double h) {
  double r = std::fmod(h, 360.0);
  if (r < 0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

double wrap_coord(double v, double lo, double extent) {
  double r = v - extent * std::floor((v - lo) / extent);
  if (r >= lo + extent) r -= extent;
  if (r < lo) r = lo;
  return r;
}
}  // namespace

World::World(WorldConfig config) : config_(config), observer_rng_(config.seed) {
  config_.validate();
  for (auto [s, p] : {std::pair{"node", "nodes"}, {"tower", "towers"}, {"sensor", "sensors"},
                      {"walker", "walkers"}})
    breeds_.emplace_back(s, p);
  reset_patches();
  series_.names.clear();
}

void World::reset_patches() {
  // the counter only grows, so a viewer holding an older revision repaints everything
  ++patch_revision_;
  patches_.clear();
  patches_.reserve(static_cast<std::size_t>(config_.width) * config_.height);
  for (int py = min_pycor(); py <= max_pycor(); ++py)
    for (int px = min_pxcor(); px <= max_pxcor(); ++px) patches_.push_back(Patch{px, py, 0.0, {}, patch_revision_});
}

Vec2 World::normalize(Vec2 p) const {
  if (config_.wrap)
    return {wrap_coord(p.x, min_x(), config_.width), wrap_coord(p.y, min_y(), config_.height)};
  return {std::clamp(p.x, min_x(), max_x()), std::clamp(p.y, min_y(), max_y())};
}

double World::distance(Vec2 p, Vec2 q) const {
  double dx = std::abs(p.x - q.x);
  double dy = std::abs(p.y - q.y);
  if (config_.wrap) {
    dx = std::min(dx, config_.width - dx);
    dy = std::min(dy, config_.height - dy);
  }
  return std::hypot(dx, dy);
}

std::vector<AgentId> World::create_agents(std::string_view breed, std::size_t count,
                                          const std::function<void(Agent&)>& init) {
  if (breeds_closed_ && !has_breed(breed)) throw EvalError("unknown breed " + std::string(breed));
  std::vector<AgentId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Agent a;
    a.id = static_cast<AgentId>(agents_.size());
    a.breed = std::string(breed);
    a.heading = rng().uniform(0.0, 360.0);
    a.color = colors::kWhite;
    agents_.push_back(std::move(a));
    adjacency_.emplace_back();
    ++live_count_;
    ids.push_back(agents_.back().id);
  }
  if (init) {
    for (AgentId id : ids) {
      init(agents_[id]);
      auto& a = agents_[id];
      a.pos = normalize(a.pos);
      a.heading = wrap_heading(a.heading);
      a.color = colors::normalize(a.color);
    }
  }
  return ids;
}

Agent& World::agent(AgentId id) {
  if (!alive(id)) throw EvalError("no such agent " + std::to_string(id));
  return agents_[id];
}

const Agent& World::agent(AgentId id) const {
  if (!alive(id)) throw EvalError("no such agent " + std::to_string(id));
  return agents_[id];
}

std::size_t World::agent_count(std::string_view breed) const {
  return static_cast<std::size_t>(std::count_if(agents_.begin(), agents_.end(), [&](const Agent& a) {
    return a.alive && a.breed == breed;
  }));
}

void World::kill(AgentId id) {
  auto& a = agent(id);
  for (AgentId other : std::vector<AgentId>(adjacency_[id])) {
    links_.erase({std::min(id, other), std::max(id, other)});
    auto& adj = adjacency_[other];
    adj.erase(std::remove(adj.begin(), adj.end(), id), adj.end());
  }
  adjacency_[id].clear();
  a.alive = false;
  --live_count_;
}

Vec2 World::move_forward(AgentId id, double step) {
  auto& a = agent(id);
  const double dx = step * heading_dx(a.heading);
  const double dy = step * heading_dy(a.heading);
  if (config_.wrap) {
    a.pos = normalize({a.pos.x + dx, a.pos.y + dy});
    return a.pos;
  }
  // Bounded world: stop at the first wall crossed and reflect off it.
  constexpr double kNone = 2.0;
  const double tx = a.pos.x + dx, ty = a.pos.y + dy;
  const double t_x = tx > max_x() ? (max_x() - a.pos.x) / dx : tx < min_x() ? (min_x() - a.pos.x) / dx : kNone;
  const double t_y = ty > max_y() ? (max_y() - a.pos.y) / dy : ty < min_y() ? (min_y() - a.pos.y) / dy : kNone;
  const double t = std::min({1.0, t_x, t_y});
  const bool hit_x = t_x <= t;
  const bool hit_y = t_y <= t;
  a.pos = normalize({a.pos.x + t * dx, a.pos.y + t * dy});
  if (hit_x) a.heading = wrap_heading(-a.heading);
  if (hit_y) a.heading = wrap_heading(180.0 - a.heading);
  return a.pos;
}

double World::turn(AgentId id, double delta) {
  auto& a = agent(id);
  a.heading = wrap_heading(a.heading + delta);
  return a.heading;
}

void World::set_heading(AgentId id, double heading) { agent(id).heading = wrap_heading(heading); }

void World::set_position(AgentId id, Vec2 p) { agent(id).pos = normalize(p); }

void World::set_color(AgentId id, double color) { agent(id).color = colors::normalize(color); }

void World::declare_breed(std::string singular, std::string plural) {
  if (has_breed(singular)) return;
  breeds_.emplace_back(std::move(singular), std::move(plural));
}

bool World::has_breed(std::string_view singular) const {
  return std::any_of(breeds_.begin(), breeds_.end(), [&](const auto& b) { return b.first == singular; });
}

std::optional<std::string> World::breed_for_plural(std::string_view plural) const {
  for (const auto& [s, p] : breeds_)
    if (p == plural) return s;
  return std::nullopt;
}

std::size_t World::patch_index(int pxcor, int pycor) const {
  if (pxcor < min_pxcor() || pxcor > max_pxcor() || pycor < min_pycor() || pycor > max_pycor())
    throw EvalError("patch " + std::to_string(pxcor) + " " + std::to_string(pycor) + " is outside the world");
  return static_cast<std::size_t>(pycor - min_pycor()) * config_.width + (pxcor - min_pxcor());
}

Patch& World::patch_at(int pxcor, int pycor) { return patches_[patch_index(pxcor, pycor)]; }

const Patch& World::patch_at(int pxcor, int pycor) const { return patches_[patch_index(pxcor, pycor)]; }

Patch& World::patch_under(Vec2 p) {
  const auto q = normalize(p);
  const int ix = std::clamp(static_cast<int>(std::floor(q.x - min_x())), 0, config_.width - 1);
  const int iy = std::clamp(static_cast<int>(std::floor(q.y - min_y())), 0, config_.height - 1);
  return patches_[static_cast<std::size_t>(iy) * config_.width + ix];
}

void World::set_pcolor(Patch& patch, double color) {
  patch.pcolor = colors::normalize(color);
  patch.revision = ++patch_revision_;
}

bool World::create_link(AgentId a, AgentId b, double weight) {
  agent(a);
  agent(b);
  if (a == b || weight < 0) return false;
  auto key = std::pair{std::min(a, b), std::max(a, b)};
  if (links_.contains(key)) return false;
  links_.emplace(key, Link{key.first, key.second, weight});
  for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
    auto& adj = adjacency_[from];
    adj.insert(std::upper_bound(adj.begin(), adj.end(), to), to);
  }
  return true;
}

bool World::has_link(AgentId a, AgentId b) const { return links_.contains({std::min(a, b), std::max(a, b)}); }

std::span<const AgentId> World::link_neighbors(AgentId id) const {
  agent(id);
  return adjacency_[id];
}

bool World::has_global(std::string_view name) const { return globals_.find(name) != globals_.end(); }

double World::global(std::string_view name) const {
  auto it = globals_.find(name);
  if (it == globals_.end()) throw EvalError("unknown variable " + std::string(name));
  return it->second;
}

void World::set_global(std::string_view name, double value) {
  auto it = globals_.find(name);
  if (it == globals_.end())
    globals_.emplace(std::string(name), value);
  else
    it->second = value;
}

void World::add_behavior(std::string name, Behavior fn) { behaviors_.emplace_back(std::move(name), std::move(fn)); }

void World::register_reporter(std::string name, Reporter fn) {
  for (const auto& r : reporters_)
    if (r.first == name) throw ConfigError("duplicate reporter " + name);
  series_.names.push_back(name);
  reporters_.emplace_back(std::move(name), std::move(fn));
}

std::vector<double> World::sample_reporters() const {
  std::vector<double> values;
  values.reserve(reporters_.size());
  for (const auto& r : reporters_) values.push_back(r.second(*this));
  return values;
}

TickReport World::step() {
  TickReport report;
  const std::int64_t next = tick_ + 1;
  for (auto& [name, fn] : behaviors_) {
    Rng stream = Rng::substream(config_.seed, name, static_cast<std::uint64_t>(next));
    active_rng_ = &stream;
    const auto start = std::chrono::steady_clock::now();
    try {
      fn(*this);
    } catch (...) {
      active_rng_ = nullptr;
      throw;
    }
    active_rng_ = nullptr;
    report.timings.push_back({name, std::chrono::steady_clock::now() - start});
  }
  tick_ = next;
  report.tick = tick_;
  report.counters = sample_reporters();
  series_.rows.push_back({tick_, report.counters});
  return report;
}

void World::clear_all() {
  agents_.clear();
  adjacency_.clear();
  live_count_ = 0;
  links_.clear();
  globals_.clear();
  tick_ = 0;
  series_.rows.clear();
  reset_patches();
  observer_rng_ = Rng(config_.seed);
}

std::string World::canonical_dump() const {
  std::string out;
  auto vars = [&](const VarMap& m) {
    for (const auto& [k, v] : m) out += " " + k + "=" + format_real(v);
  };
  out += "tick " + std::to_string(tick_) + "\n";
  for (const auto& a : agents_) {
    if (!a.alive) continue;
    out += "agent " + std::to_string(a.id) + " " + a.breed + " " + format_real(a.pos.x) + " " +
           format_real(a.pos.y) + " " + format_real(a.heading) + " " + format_real(a.color) + " " +
           std::string(to_string(a.state));
    vars(a.vars);
    out += "\n";
  }
  for (const auto& p : patches_) {
    if (p.pcolor == 0 && p.vars.empty()) continue;
    out += "patch " + std::to_string(p.pxcor) + " " + std::to_string(p.pycor) + " " + format_real(p.pcolor);
    vars(p.vars);
    out += "\n";
  }
  for (const auto& [key, l] : links_)
    out += "link " + std::to_string(l.a) + " " + std::to_string(l.b) + " " + format_real(l.weight) + "\n";
  out += "globals";
  vars(globals_);
  out += "\n";
  return out;
}

std::uint64_t World::digest() const { return fnv1a64(canonical_dump()); }

}  // namespace sosim
