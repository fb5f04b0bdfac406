#include "sosim/search.hpp"

#include <algorithm>
#include <cmath>

#include "sosim/error.hpp"
#include "sosim/selforg.hpp"

namespace sosim {

namespace {
std::vector<char> target_mask(const Graph& graph, const std::vector<Vertex>& targets) {
  std::vector<char> mask(graph.size(), 0);
  for (Vertex t : targets) mask.at(t) = 1;
  return mask;
}

constexpr Vertex kNoParent = ~Vertex{0};
}  // namespace

RingOutcome flood_with_ttl(const Graph& graph, Vertex source, const std::vector<Vertex>& targets, int ttl) {
  if (ttl < 1) throw EvalError("flood ttl must be >= 1");
  const auto is_target = target_mask(graph, targets);
  RingOutcome out;
  if (is_target.at(source)) {
    out.found = true;
    out.hit_level = 0;
    return out;
  }
  std::vector<char> visited(graph.size(), 0);
  std::vector<Vertex> parent(graph.size(), kNoParent);
  visited[source] = 1;
  std::vector<Vertex> frontier{source};
  for (int level = 0; level < ttl && !frontier.empty(); ++level) {
    std::vector<Vertex> next;
    for (Vertex u : frontier) {
      for (Vertex v : graph.neighbors(u)) {
        if (v == parent[u]) continue;
        ++out.messages;
        if (!visited[v]) {
          visited[v] = 1;
          parent[v] = u;
          next.push_back(v);
          if (is_target[v]) out.found = true;
        }
      }
    }
    out.levels_expanded = level + 1;
    if (out.found) {
      out.hit_level = level + 1;
      break;
    }
    frontier = std::move(next);
  }
  return out;
}

std::vector<int> odd_ttl_sequence(int rings) {
  std::vector<int> seq;
  for (int i = 1; i <= rings; ++i) seq.push_back(2 * i - 1);
  return seq;
}

void QueryConfig::validate(const Graph& graph) const {
  if (source >= graph.size()) throw ConfigError("query source out of range");
  if (targets.empty()) throw ConfigError("query needs at least one target");
  for (Vertex t : targets)
    if (t >= graph.size()) throw ConfigError("query target out of range");
  const auto ttls = effective_ttls();
  if (ttls.empty()) throw ConfigError("query needs at least one ring");
  for (std::size_t i = 0; i < ttls.size(); ++i) {
    if (ttls[i] < 1) throw ConfigError("ttl values must be positive");
    if (i > 0 && ttls[i] <= ttls[i - 1]) throw ConfigError("ttl sequence must be strictly increasing");
  }
}

std::vector<int> QueryConfig::effective_ttls() const {
  return ttl_sequence.empty() ? odd_ttl_sequence(max_rings) : ttl_sequence;
}

SearchOutcome expanding_ring_search(const Graph& graph, const QueryConfig& query) {
  query.validate(graph);
  SearchOutcome out;
  const auto ttls = query.effective_ttls();
  for (std::size_t ring = 0; ring < ttls.size(); ++ring) {
    const auto r = flood_with_ttl(graph, query.source, query.targets, ttls[ring]);
    out.messages += r.messages;
    out.ring_messages.push_back(r.messages);
    out.ticks += r.levels_expanded;
    out.ttl_used = ttls[ring];
    if (r.found) {
      out.success = true;
      out.rings_used = static_cast<int>(ring + 1);
      out.hops_to_hit = r.hit_level;
      break;
    }
  }
  return out;
}

void WalkConfig::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (check_interval < 1) throw ConfigError("check interval must be >= 1");
  if (ttl_max < 1) throw ConfigError("ttl_max must be >= 1");
}

SearchOutcome k_random_walk(const Graph& graph, Vertex source, const std::vector<Vertex>& targets,
                            const WalkConfig& walk, Rng& rng) {
  walk.validate();
  const auto is_target = target_mask(graph, targets);
  SearchOutcome out;
  if (is_target.at(source)) {
    out.success = true;
    out.hops_to_hit = 0;
    return out;
  }
  if (graph.degree(source) == 0) return out;

  struct Walker {
    Rng rng;
    Vertex at;
    WalkerTrace trace;
    bool live = true;
  };
  std::vector<Walker> walkers;
  walkers.reserve(static_cast<std::size_t>(walk.k));
  for (int i = 0; i < walk.k; ++i) walkers.push_back({Rng(rng.next_u64()), source, {}, true});

  std::size_t live = walkers.size();
  while (live > 0) {
    ++out.ticks;
    for (auto& w : walkers) {
      if (!w.live) continue;
      const auto nbrs = graph.neighbors(w.at);
      w.at = nbrs[w.rng.below(nbrs.size())];
      ++w.trace.hops;
      ++out.messages;
      if (is_target[w.at]) {
        w.trace.hit = true;
        if (!out.success) {
          out.success = true;
          out.hops_to_hit = w.trace.hops;
        }
      }
      bool stop = w.trace.hit || w.trace.hops >= walk.ttl_max;
      if (w.trace.hops % walk.check_interval == 0) {
        ++w.trace.checks;
        ++out.check_messages;
        if (out.success) stop = true;
      }
      if (stop) {
        w.live = false;
        --live;
      }
    }
  }
  for (const auto& w : walkers) out.walkers.push_back(w.trace);
  return out;
}

std::vector<AgentId> embed_overlay(World& world, const Graph& graph, Layout layout, int columns) {
  const std::size_t n = graph.size();
  std::vector<AgentId> ids;
  if (n == 0) return ids;
  const int cols = columns > 0 ? columns : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = static_cast<int>((n + cols - 1) / cols);
  const double span_x = world.max_x() - world.min_x();
  const double span_y = world.max_y() - world.min_y();
  // Unit spacing when the lattice fits, otherwise shrink to fit.
  const double spacing = std::min({1.0, (span_x - 1) / std::max(1, cols), (span_y - 1) / std::max(1, rows)});
  const double radius = 0.4 * std::min(span_x, span_y);

  std::size_t index = 0;
  ids = world.create_agents("node", n, [&](Agent& a) {
    const std::size_t v = index++;
    switch (layout) {
      case Layout::grid: {
        const int r = static_cast<int>(v) / cols;
        const int c = static_cast<int>(v) % cols;
        a.pos = {(c - (cols - 1) / 2) * spacing, ((rows - 1) / 2 - r) * spacing};
        break;
      }
      case Layout::circle: {
        const double h = 360.0 * static_cast<double>(v) / static_cast<double>(n);
        a.pos = {radius * heading_dx(h), radius * heading_dy(h)};
        break;
      }
      case Layout::random: a.pos = random_position(world); break;
    }
  });
  for (Vertex v = 0; v < n; ++v)
    for (Vertex u : graph.neighbors(v))
      if (v < u) world.create_link(ids[v], ids[u]);
  return ids;
}

}  // namespace sosim
