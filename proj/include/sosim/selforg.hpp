#pragma once

#include <map>
#include <optional>
#include <vector>

#include "sosim/graph.hpp"
#include "sosim/world.hpp"

namespace sosim {

/// Uniform point inside the world bounds, drawn from world.rng().
Vec2 random_position(World& world);

/// One correlated random-walk move: turn by U[-turn_bound, turn_bound), then
/// advance `step` patches.
void random_walk_step(World& world, AgentId id, double turn_bound, double step);

// ---------------------------------------------------------------------------
// Mobile nodes drifting until they come within range of a fixed tower.

struct FlockingParams {
  int n_nodes = 100;
  int n_towers = 5;
  double capture_radius = 3.0;
  double step = 0.1;
  double turn_bound = 45.0;

  void validate() const;
};

/// Creates n_towers towers (ids first) with distinct palette colors, then
/// n_nodes free white nodes, all at uniform positions. World must be empty.
void flocking_setup(World& world, const FlockingParams& params);

/// Nearest tower within the capture radius, ties to the lower id.
std::optional<AgentId> capturing_tower(const World& world, Vec2 p, double radius);

/// Moves every free node once (shuffled order) and locks the ones that end
/// up in range. Returns how many nodes are still free.
std::size_t flocking_tick(World& world, const FlockingParams& params);

// ---------------------------------------------------------------------------
// Lowest-id clusterhead election over the sensing graph.

struct ClusterParams {
  int n_nodes = 100;
  double sensing_radius = 3.0;

  void validate() const;
};

struct Clustering {
  std::vector<AgentId> heads;               // ascending
  std::map<AgentId, AgentId> membership;    // member -> head
  int rounds = 0;
};

/// Synchronous election rounds over graph vertices (vertex index = rank).
/// Per round, each undecided vertex that is smaller than all its undecided
/// neighbors declares itself head; undecided neighbors of new heads become
/// members of the smallest one, and existing members switch to a newly
/// announced head when it is smaller than their current one.
class ClusterElection {
 public:
  enum class Role { undecided, head, member };

  explicit ClusterElection(const Graph& graph);

  bool done() const { return undecided_ == 0; }
  /// Runs one round; returns the heads declared in it.
  std::vector<Vertex> round();
  void run();

  int rounds() const { return rounds_; }
  Role role(Vertex v) const { return role_.at(v); }
  Vertex head_of(Vertex v) const { return head_of_.at(v); }
  std::size_t undecided() const { return undecided_; }
  std::size_t head_count() const;

 private:
  const Graph& graph_;
  std::vector<Role> role_;
  std::vector<Vertex> head_of_;
  std::size_t undecided_;
  int rounds_ = 0;
};

/// Maps an election over a sensing graph back to agent ids.
Clustering clustering_from(const ClusterElection& election, const SensingGraph& sensing);

/// Places n_nodes undecided nodes uniformly. World must be empty.
void clustering_setup(World& world, const ClusterParams& params);

/// Elects heads among live nodes, writes head/member state and cluster
/// colors onto the agents, and returns the clustering.
Clustering cluster_election(World& world, const ClusterParams& params);

/// Colors and states agents from a (possibly partial) election.
void paint_clusters(World& world, const ClusterElection& election, const SensingGraph& sensing);

}  // namespace sosim
