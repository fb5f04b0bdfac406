#include "sosim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "sosim/error.hpp"

namespace sosim {

Graph Graph::from_adjacency(std::vector<std::vector<Vertex>> adjacency) {
  Graph g;
  g.adj_ = std::move(adjacency);
  for (Vertex v = 0; v < g.adj_.size(); ++v) {
    auto& list = g.adj_[v];
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw ConfigError("graph: duplicate edge at vertex " + std::to_string(v));
    for (Vertex u : list) {
      if (u == v || u >= g.adj_.size()) throw ConfigError("graph: invalid edge at vertex " + std::to_string(v));
    }
  }
  for (Vertex v = 0; v < g.adj_.size(); ++v)
    for (Vertex u : g.adj_[v])
      if (!std::binary_search(g.adj_[u].begin(), g.adj_[u].end(), v))
        throw ConfigError("graph: asymmetric edge " + std::to_string(v) + "-" + std::to_string(u));
  return g;
}

bool Graph::add_edge(Vertex u, Vertex v) {
  if (u == v || has_edge(u, v)) return false;
  for (auto [from, to] : {std::pair{u, v}, std::pair{v, u}}) {
    auto& list = adj_.at(from);
    list.insert(std::upper_bound(list.begin(), list.end(), to), to);
  }
  return true;
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  const auto& list = adj_.at(u);
  return std::binary_search(list.begin(), list.end(), v);
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : adj_) total += list.size();
  return total / 2;
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (const auto& list : adj_) best = std::max(best, list.size());
  return best;
}

bool is_connected(const Graph& g) {
  if (g.size() <= 1) return true;
  std::vector<char> seen(g.size(), 0);
  std::deque<Vertex> queue{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    for (Vertex u : g.neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        queue.push_back(u);
      }
    }
  }
  return reached == g.size();
}

Graph build_overlay(const OverlaySpec& spec, std::uint64_t seed) {
  if (spec.kind == OverlayKind::lattice) {
    if (spec.rows < 1 || spec.cols < 1) throw ConfigError("lattice needs rows, cols >= 1");
    Graph g(static_cast<std::size_t>(spec.rows) * spec.cols);
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        const auto v = static_cast<Vertex>(r * spec.cols + c);
        if (c + 1 < spec.cols) g.add_edge(v, v + 1);
        if (r + 1 < spec.rows) g.add_edge(v, v + static_cast<Vertex>(spec.cols));
      }
    }
    return g;
  }
  if (spec.n < 1) throw ConfigError("random overlay needs n >= 1");
  if (spec.edge_probability < 0 || spec.edge_probability > 1)
    throw ConfigError("edge probability must be in [0, 1]");
  const int attempts = spec.require_connected ? std::max(1, spec.max_attempts) : 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    Rng rng = Rng::substream(seed, "overlay", static_cast<std::uint64_t>(attempt));
    std::vector<std::vector<Vertex>> adj(spec.n);
    for (Vertex i = 0; i < spec.n; ++i) {
      for (Vertex j = i + 1; j < spec.n; ++j) {
        if (rng.uniform() < spec.edge_probability) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
      }
    }
    Graph g = Graph::from_adjacency(std::move(adj));
    if (!spec.require_connected || is_connected(g)) return g;
  }
  throw ConfigError("no connected G(n, p) graph found after " + std::to_string(attempts) +
                    " attempts; raise edge_probability");
}

SensingGraph sensing_graph(const World& world, double radius, BreedFilter breed) {
  SensingGraph out;
  out.ids = all_agents(world, breed);
  const std::size_t n = out.ids.size();
  std::vector<Vec2> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = world.agent(out.ids[i]).pos;
  std::vector<std::vector<Vertex>> adj(n);

  const auto& cfg = world.config();
  const int nx = radius > 0 ? static_cast<int>(std::floor(cfg.width / radius)) : 0;
  const int ny = radius > 0 ? static_cast<int>(std::floor(cfg.height / radius)) : 0;
  if (nx < 3 || ny < 3) {
    for (Vertex i = 0; i < n; ++i)
      for (Vertex j = i + 1; j < n; ++j)
        if (world.distance(pos[i], pos[j]) <= radius) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
    out.graph = Graph::from_adjacency(std::move(adj));
    return out;
  }

  // Cells are at least `radius` wide, so neighbors lie in the 3x3 block.
  const double cw = static_cast<double>(cfg.width) / nx;
  const double ch = static_cast<double>(cfg.height) / ny;
  auto cell_of = [&](Vec2 p) {
    int cx = std::clamp(static_cast<int>(std::floor((p.x - world.min_x()) / cw)), 0, nx - 1);
    int cy = std::clamp(static_cast<int>(std::floor((p.y - world.min_y()) / ch)), 0, ny - 1);
    return std::pair{cx, cy};
  };
  std::vector<std::vector<Vertex>> cells(static_cast<std::size_t>(nx) * ny);
  for (Vertex i = 0; i < n; ++i) {
    auto [cx, cy] = cell_of(pos[i]);
    cells[static_cast<std::size_t>(cy) * nx + cx].push_back(i);
  }
  for (Vertex i = 0; i < n; ++i) {
    auto [cx, cy] = cell_of(pos[i]);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        int x = cx + dx, y = cy + dy;
        if (cfg.wrap) {
          x = (x + nx) % nx;
          y = (y + ny) % ny;
        } else if (x < 0 || y < 0 || x >= nx || y >= ny) {
          continue;
        }
        for (Vertex j : cells[static_cast<std::size_t>(y) * nx + x])
          if (j > i && world.distance(pos[i], pos[j]) <= radius) {
            adj[i].push_back(j);
            adj[j].push_back(i);
          }
      }
    }
  }
  out.graph = Graph::from_adjacency(std::move(adj));
  return out;
}

}  // namespace sosim
