#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sosim/agentset.hpp"
#include "sosim/world.hpp"

namespace sosim {

using Vertex = std::uint32_t;

/// Simple undirected graph with sorted adjacency lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}

  /// Takes neighbor lists that may be unsorted; validates symmetry.
  static Graph from_adjacency(std::vector<std::vector<Vertex>> adjacency);

  std::size_t size() const { return adj_.size(); }
  /// Returns false for self-loops and duplicates.
  bool add_edge(Vertex u, Vertex v);
  bool has_edge(Vertex u, Vertex v) const;
  std::span<const Vertex> neighbors(Vertex v) const { return adj_.at(v); }
  std::size_t degree(Vertex v) const { return adj_.at(v).size(); }
  std::size_t edge_count() const;
  std::size_t max_degree() const;

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::vector<Vertex>> adj_;
};

bool is_connected(const Graph& g);

enum class OverlayKind { lattice, random };

struct OverlaySpec {
  OverlayKind kind = OverlayKind::lattice;
  int rows = 5;  // lattice
  int cols = 5;
  std::size_t n = 100;  // random
  double edge_probability = 0.05;
  bool require_connected = false;
  int max_attempts = 100;
};

/// 4-neighbor non-wrapping lattice (vertex r*cols + c) or G(n, p). Pure in
/// (spec, seed). Throws ConfigError when a connected random graph is not
/// found within max_attempts.
Graph build_overlay(const OverlaySpec& spec, std::uint64_t seed);

/// Proximity graph over live agents; vertex i is ids[i] and ids ascend, so
/// vertex order is agent id order.
struct SensingGraph {
  Graph graph;
  std::vector<AgentId> ids;
};

/// Edge iff world.distance <= radius. Uses a bucket grid when the radius is
/// small relative to the world.
SensingGraph sensing_graph(const World& world, double radius, BreedFilter breed = std::nullopt);

}  // namespace sosim
