#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sosim/graph.hpp"
#include "sosim/rng.hpp"
#include "sosim/world.hpp"

namespace sosim {

struct RingOutcome {
  bool found = false;
  std::int64_t messages = 0;
  int levels_expanded = 0;
  std::optional<int> hit_level;
};

/// One TTL-bounded flood from `source`. Nodes first reached at level l < ttl
/// forward to every neighbor except the one they first heard from (the
/// source sends to all). Every send is a message, duplicates included;
/// duplicates are not forwarded. Expansion stops after the level at which a
/// target is first reached.
RingOutcome flood_with_ttl(const Graph& graph, Vertex source, const std::vector<Vertex>& targets, int ttl);

/// 1, 3, 5, ... (2i - 1) for `rings` rings.
std::vector<int> odd_ttl_sequence(int rings);

struct QueryConfig {
  Vertex source = 0;
  std::vector<Vertex> targets;
  std::vector<int> ttl_sequence;  // empty -> odd_ttl_sequence(max_rings)
  int max_rings = 16;

  void validate(const Graph& graph) const;
  std::vector<int> effective_ttls() const;
};

struct WalkerTrace {
  int hops = 0;
  int checks = 0;
  bool hit = false;
};

struct SearchOutcome {
  bool success = false;
  std::int64_t messages = 0;        // query forwards
  std::int64_t check_messages = 0;
  std::optional<int> hops_to_hit;
  std::optional<int> rings_used;    // 1-based, expanding ring only
  std::optional<int> ttl_used;      // ttl of the last ring run
  int ticks = 0;
  std::vector<std::int64_t> ring_messages;
  std::vector<WalkerTrace> walkers;
};

/// Runs independent floods with growing TTL until a target is found.
SearchOutcome expanding_ring_search(const Graph& graph, const QueryConfig& query);

struct WalkConfig {
  int k = 16;
  int check_interval = 4;
  int ttl_max = 1000;

  void validate() const;
};

/// k lock-step random walkers with periodic checks back to the source.
/// Each walker draws from its own stream seeded from `rng`.
SearchOutcome k_random_walk(const Graph& graph, Vertex source, const std::vector<Vertex>& targets,
                            const WalkConfig& walk, Rng& rng);

enum class Layout { grid, circle, random };

/// One `node` agent per vertex, positioned by layout, and one link per edge.
/// `columns` is used by the grid layout (0 = ceil(sqrt(n))). Returns the
/// agent id of each vertex.
std::vector<AgentId> embed_overlay(World& world, const Graph& graph, Layout layout, int columns = 0);

}  // namespace sosim
