#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "sosim/agentset.hpp"
#include "sosim/colors.hpp"
#include "sosim/graph.hpp"
#include "sosim/selforg.hpp"

using namespace sosim;

namespace {

std::vector<AgentId> nodes_of(const World& w) { return all_agents(w, "node"); }

void check_matches_greedy(const Graph& g) {
  ClusterElection e(g);
  e.run();
  const auto expect = oracle::greedy_clusters(g);
  for (Vertex v = 0; v < g.size(); ++v) {
    if (expect.heads.contains(v)) {
      REQUIRE(e.role(v) == ClusterElection::Role::head);
    } else {
      REQUIRE(e.role(v) == ClusterElection::Role::member);
      REQUIRE(e.head_of(v) == expect.member_of.at(v));
    }
  }
  CHECK(e.rounds() <= static_cast<int>(std::max<std::size_t>(g.size(), 1)));
}

}  // namespace

TEST_CASE("flocking setup: counts, distinct tower colors, determinism") {
  World w(WorldConfig{33, 33, true, 17, {}});
  flocking_setup(w, {100, 5, 3, 0.1, 45});
  CHECK(w.agent_count() == 105);
  std::set<double> tower_colors;
  for (AgentId t : all_agents(w, "tower")) tower_colors.insert(w.agent(t).color);
  CHECK(tower_colors.size() == 5);
  for (AgentId n : nodes_of(w)) CHECK(w.agent(n).state == AgentState::free);

  World again(WorldConfig{33, 33, true, 17, {}});
  flocking_setup(again, {100, 5, 3, 0.1, 45});
  CHECK(again.digest() == w.digest());

  World towers_only(WorldConfig{33, 33, true, 17, {}});
  flocking_setup(towers_only, {0, 3, 3, 0.1, 45});
  CHECK(towers_only.agent_count() == 3);
  CHECK(flocking_tick(towers_only, {0, 3, 3, 0.1, 45}) == 0);

  World too_many;
  CHECK_THROWS(flocking_setup(too_many, {10, 14, 3, 0.1, 45}));
  CHECK_THROWS(flocking_setup(w, {10, 2, 3, 0.1, 45}));  // not empty
  CHECK_THROWS((FlockingParams{10, 0, 3, 0.1, 45}.validate()));
  CHECK_THROWS((FlockingParams{10, 2, 0, 0.1, 45}.validate()));
  CHECK_THROWS((FlockingParams{10, 2, 3, 0.1, 200}.validate()));
}

TEST_CASE("capturing_tower: inclusive radius and lowest-id ties") {
  World w(WorldConfig{33, 33, true, 1, {}});
  w.create_agents("tower", 2, [](Agent& a) { a.pos = {a.id == 0 ? -2.0 : 2.0, 0}; });
  CHECK(capturing_tower(w, {0, 0}, 2) == AgentId{0});
  CHECK(capturing_tower(w, {1, 0}, 3) == AgentId{1});
  CHECK_FALSE(capturing_tower(w, {0, 5}, 3));
  CHECK(capturing_tower(w, {-2, 3}, 3) == AgentId{0});
}

TEST_CASE("flocking tick: a node in range at tick start locks with that tower's color") {
  World w(WorldConfig{33, 33, true, 1, {}});
  FlockingParams p{1, 1, 3, 0.1, 45};
  w.create_agents("tower", 1, [](Agent& a) {
    a.pos = {5, 5};
    a.color = colors::kRed;
    a.state = AgentState::locked;
  });
  w.create_agents("node", 1, [](Agent& a) { a.pos = {5, 7}; });
  CHECK(flocking_tick(w, p) == 0);
  CHECK(w.agent(1).state == AgentState::locked);
  CHECK(w.agent(1).color == colors::kRed);
  CHECK(w.agent(1).pos == Vec2{5, 7});
}

TEST_CASE("flocking run: free count non-increasing, locked nodes fixed and within range of their tower") {
  World w(WorldConfig{33, 33, true, 23, {}});
  FlockingParams p{150, 6, 3, 0.5, 45};
  flocking_setup(w, p);
  std::size_t free_before = p.n_nodes + 1;
  std::map<AgentId, Vec2> locked_at;
  for (int t = 0; t < 400; ++t) {
    const auto free_now = flocking_tick(w, p);
    CHECK(free_now <= free_before);
    free_before = free_now;
    for (AgentId n : nodes_of(w)) {
      const auto& a = w.agent(n);
      if (a.state != AgentState::locked) continue;
      auto [it, fresh] = locked_at.emplace(n, a.pos);
      if (!fresh) CHECK(it->second == a.pos);
      bool near_same_color = false;
      for (AgentId t2 : all_agents(w, "tower"))
        near_same_color |= w.agent(t2).color == a.color && w.distance(w.agent(t2).pos, a.pos) <= p.capture_radius;
      CHECK(near_same_color);
    }
  }
}

TEST_CASE("election: examples") {
  // path 3-1-2 relabelled onto vertices: rank order 1 < 2 < 3
  Graph path(4);
  path.add_edge(3, 1);
  path.add_edge(1, 2);
  ClusterElection e(path);
  e.run();
  CHECK(e.role(0) == ClusterElection::Role::head);  // isolated
  CHECK(e.role(1) == ClusterElection::Role::head);
  CHECK(e.head_of(3) == 1);
  CHECK(e.head_of(2) == 1);
  CHECK(e.head_count() == 2);

  Graph single(1);
  ClusterElection s(single);
  s.run();
  CHECK(s.role(0) == ClusterElection::Role::head);
  CHECK(s.rounds() == 1);
}

TEST_CASE("election equals the greedy oracle on every graph with at most 5 nodes") {
  for (int n = 1; n <= 5; ++n)
    for (std::uint64_t m = 0; m < oracle::graph_count(n); ++m) check_matches_greedy(oracle::graph_from_mask(n, m));
}

TEST_CASE("election equals the greedy oracle on random geometric graphs; heads independent; min id heads") {
  Rng rng(99);
  for (int i = 0; i < 60; ++i) {
    const int n = 5 + static_cast<int>(rng.below(46));
    const Graph g = oracle::random_geometric(n, 10, 1.5 + rng.uniform() * 2, rng);
    check_matches_greedy(g);
    ClusterElection e(g);
    e.run();
    CHECK(e.role(0) == ClusterElection::Role::head);
    for (Vertex v = 0; v < g.size(); ++v)
      for (Vertex u : g.neighbors(v))
        CHECK_FALSE((e.role(u) == ClusterElection::Role::head && e.role(v) == ClusterElection::Role::head));
  }
}

TEST_CASE("sensing graph: brute force agreement, degenerate radii, lattice count") {
  World w(WorldConfig{33, 33, true, 3, {}});
  w.create_agents("node", 300, [&](Agent& a) { a.pos = random_position(w); });
  for (double r : {0.5, 1.0, 2.5, 6.0, 15.0}) {
    const auto s = sensing_graph(w, r, "node");
    CHECK(s.graph == oracle::brute_sensing(w, s.ids, r));
  }
  CHECK(sensing_graph(w, 1e-9, "node").graph.edge_count() == 0);
  const auto full = sensing_graph(w, 50, "node");
  CHECK(full.graph.edge_count() == 300u * 299 / 2);

  World g(WorldConfig{33, 33, true, 3, {}});
  g.create_agents("node", 25, [](Agent& a) { a.pos = {static_cast<double>(a.id % 5), static_cast<double>(a.id / 5)}; });
  CHECK(sensing_graph(g, 1, "node").graph.edge_count() == 40);
}

TEST_CASE("cluster_election on a world: every member is within range of its head") {
  World w(WorldConfig{33, 33, true, 12, {}});
  ClusterParams p{120, 3};
  clustering_setup(w, p);
  const auto c = cluster_election(w, p);
  std::set<AgentId> heads(c.heads.begin(), c.heads.end());
  CHECK(heads.size() + c.membership.size() == 120);
  for (auto [m, h] : c.membership) {
    CHECK_FALSE(heads.contains(m));
    CHECK(heads.contains(h));
    CHECK(w.distance(w.agent(m).pos, w.agent(h).pos) <= p.sensing_radius);
    CHECK(w.agent(m).state == AgentState::member);
  }
  CHECK(heads.contains(0));
}
