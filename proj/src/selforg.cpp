#include "sosim/selforg.hpp"

#include <algorithm>

#include "sosim/agentset.hpp"
#include "sosim/colors.hpp"
#include "sosim/error.hpp"

namespace sosim {

Vec2 random_position(World& world) {
  auto& rng = world.rng();
  const double x = rng.uniform(world.min_x(), world.max_x());
  const double y = rng.uniform(world.min_y(), world.max_y());
  return {x, y};
}

void random_walk_step(World& world, AgentId id, double turn_bound, double step) {
  world.turn(id, world.rng().uniform(-turn_bound, turn_bound));
  world.move_forward(id, step);
}

void FlockingParams::validate() const {
  if (n_nodes < 0) throw ConfigError("n_nodes must be >= 0");
  if (n_towers < 1) throw ConfigError("n_towers must be >= 1");
  if (!(capture_radius > 0)) throw ConfigError("capture_radius must be > 0");
  if (!(step > 0)) throw ConfigError("step must be > 0");
  if (turn_bound < 0 || turn_bound > 180) throw ConfigError("turn_bound must be in [0, 180]");
}

void flocking_setup(World& world, const FlockingParams& params) {
  params.validate();
  const auto palette = colors::distinct_palette();
  if (static_cast<std::size_t>(params.n_towers) > palette.size())
    throw ConfigError("n_towers exceeds the " + std::to_string(palette.size()) + " distinct tower colors");
  if (world.agent_count() != 0) throw EvalError("flocking setup needs an empty world");
  std::size_t next_color = 0;
  world.create_agents("tower", static_cast<std::size_t>(params.n_towers), [&](Agent& a) {
    a.pos = random_position(world);
    a.color = palette[next_color++];
    a.state = AgentState::locked;
  });
  world.create_agents("node", static_cast<std::size_t>(params.n_nodes), [&](Agent& a) {
    a.pos = random_position(world);
    a.color = colors::kWhite;
    a.state = AgentState::free;
  });
}

std::optional<AgentId> capturing_tower(const World& world, Vec2 p, double radius) {
  std::optional<AgentId> best;
  double best_d = 0;
  for (const auto& a : world.agents()) {
    if (!a.alive || a.breed != "tower") continue;
    const double d = world.distance(p, a.pos);
    if (d <= radius && (!best || d < best_d)) {
      best = a.id;
      best_d = d;
    }
  }
  return best;
}

std::size_t flocking_tick(World& world, const FlockingParams& params) {
  auto try_capture = [&](AgentId id) {
    auto& node = world.agent(id);
    if (auto tower = capturing_tower(world, node.pos, params.capture_radius)) {
      node.state = AgentState::locked;
      node.color = world.agent(*tower).color;
      return true;
    }
    return false;
  };
  const auto free_nodes = select_with(world, "node", [](const Agent& a) { return a.state == AgentState::free; });
  ask(world, free_nodes, [&](World& w, AgentId id) {
    if (try_capture(id)) return;
    random_walk_step(w, id, params.turn_bound, params.step);
    try_capture(id);
  });
  return select_with(world, "node", [](const Agent& a) { return a.state == AgentState::free; }).size();
}

void ClusterParams::validate() const {
  if (n_nodes < 1) throw ConfigError("n_nodes must be >= 1");
  if (!(sensing_radius > 0)) throw ConfigError("sensing_radius must be > 0");
}

ClusterElection::ClusterElection(const Graph& graph)
    : graph_(graph), role_(graph.size(), Role::undecided), head_of_(graph.size(), 0), undecided_(graph.size()) {}

std::vector<Vertex> ClusterElection::round() {
  std::vector<Vertex> declared;
  if (done()) return declared;
  for (Vertex v = 0; v < graph_.size(); ++v) {
    if (role_[v] != Role::undecided) continue;
    const auto nbrs = graph_.neighbors(v);
    const bool lowest = std::none_of(nbrs.begin(), nbrs.end(),
                                     [&](Vertex u) { return role_[u] == Role::undecided && u < v; });
    if (lowest) declared.push_back(v);
  }
  for (Vertex h : declared) {
    role_[h] = Role::head;
    head_of_[h] = h;
    --undecided_;
  }
  // Ascending order, so the first head a node hears from is its smallest.
  for (Vertex h : declared) {
    for (Vertex u : graph_.neighbors(h)) {
      if (role_[u] == Role::undecided) {
        role_[u] = Role::member;
        head_of_[u] = h;
        --undecided_;
      } else if (role_[u] == Role::member && h < head_of_[u]) {
        head_of_[u] = h;
      }
    }
  }
  ++rounds_;
  return declared;
}

void ClusterElection::run() {
  while (!done()) round();
}

std::size_t ClusterElection::head_count() const {
  return static_cast<std::size_t>(std::count(role_.begin(), role_.end(), Role::head));
}

Clustering clustering_from(const ClusterElection& election, const SensingGraph& sensing) {
  Clustering out;
  out.rounds = election.rounds();
  for (Vertex v = 0; v < sensing.ids.size(); ++v) {
    switch (election.role(v)) {
      case ClusterElection::Role::head: out.heads.push_back(sensing.ids[v]); break;
      case ClusterElection::Role::member: out.membership[sensing.ids[v]] = sensing.ids[election.head_of(v)]; break;
      case ClusterElection::Role::undecided: break;
    }
  }
  return out;
}

void clustering_setup(World& world, const ClusterParams& params) {
  params.validate();
  if (world.agent_count() != 0) throw EvalError("clustering setup needs an empty world");
  world.create_agents("node", static_cast<std::size_t>(params.n_nodes), [&](Agent& a) {
    a.pos = random_position(world);
    a.color = colors::kGray;
    a.state = AgentState::undecided;
  });
}

void paint_clusters(World& world, const ClusterElection& election, const SensingGraph& sensing) {
  const auto palette = colors::distinct_palette();
  for (Vertex v = 0; v < sensing.ids.size(); ++v) {
    auto& a = world.agent(sensing.ids[v]);
    switch (election.role(v)) {
      case ClusterElection::Role::head:
        a.state = AgentState::head;
        a.color = palette[v % palette.size()];
        break;
      case ClusterElection::Role::member:
        a.state = AgentState::member;
        a.color = colors::normalize(palette[election.head_of(v) % palette.size()] + 3.0);
        break;
      case ClusterElection::Role::undecided:
        a.state = AgentState::undecided;
        a.color = colors::kGray;
        break;
    }
  }
}

Clustering cluster_election(World& world, const ClusterParams& params) {
  params.validate();
  const auto sensing = sensing_graph(world, params.sensing_radius, "node");
  ClusterElection election(sensing.graph);
  election.run();
  paint_clusters(world, election, sensing);
  return clustering_from(election, sensing);
}

}  // namespace sosim
