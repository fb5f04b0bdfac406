#include <algorithm>
#include <cmath>
#include <limits>

#include "sosim/agentset.hpp"
#include "sosim/colors.hpp"
#include "sosim/error.hpp"
#include "sosim/field.hpp"
#include "sosim/graph.hpp"
#include "sosim/model.hpp"
#include "sosim/search.hpp"
#include "sosim/selforg.hpp"

namespace sosim {

namespace {

ParamSpec int_param(std::string name, double lo, double hi, double def, bool live, std::string doc) {
  return {std::move(name), ParamType::integer, lo, hi, def, live, {}, std::move(doc)};
}

ParamSpec real_param(std::string name, double lo, double hi, double def, bool live, std::string doc) {
  return {std::move(name), ParamType::real, lo, hi, def, live, {}, std::move(doc)};
}

ParamSpec bool_param(std::string name, bool def, bool live, std::string doc) {
  return {std::move(name), ParamType::boolean, 0, 1, def ? 1.0 : 0.0, live, {}, std::move(doc)};
}

ParamSpec choice_param(std::string name, std::vector<std::string> choices, std::size_t def, bool live,
                       std::string doc) {
  const double hi = static_cast<double>(choices.size() - 1);
  return {std::move(name), ParamType::choice, 0, hi, static_cast<double>(def), live, std::move(choices), std::move(doc)};
}

double none_as_minus_one(const std::optional<int>& v) { return v ? *v : -1.0; }

// ---------------------------------------------------------------------------

/// Turtles created at random patch centers drift forward; patches take one
/// random color.
class TutorialModel : public Model {
 public:
  void install(World& world, const ParamSet& params) override {
    world.add_behavior("go", [&params](World& w) {
      const double step = params.get("step");
      ask(w, all_agents(w), [step](World& w2, AgentId id) { w2.move_forward(id, step); });
    });
    world.register_reporter("mean_x", [](const World& w) { return mean_of(w, [](const Agent& a) { return a.pos.x; }); });
    world.register_reporter("mean_y", [](const World& w) { return mean_of(w, [](const Agent& a) { return a.pos.y; }); });
  }

  void setup(World& world, const ParamSet& params) override {
    world.create_agents("node", static_cast<std::size_t>(params.get_int("n_turtles")), [&](Agent& a) {
      a.pos = {static_cast<double>(world.rng().between(world.min_pxcor(), world.max_pxcor())),
               static_cast<double>(world.rng().between(world.min_pycor(), world.max_pycor()))};
    });
    const double patch_color = static_cast<double>(world.rng().below(140));
    for (auto& p : world.patches()) world.set_pcolor(p, patch_color);
  }

 private:
  template <class F>
  static double mean_of(const World& w, F f) {
    double total = 0;
    std::size_t n = 0;
    for (const auto& a : w.agents())
      if (a.alive) {
        total += f(a);
        ++n;
      }
    return n ? total / static_cast<double>(n) : 0.0;
  }
};

// ---------------------------------------------------------------------------

FlockingParams flocking_params(const ParamSet& p) {
  return {p.get_int("n_nodes"), p.get_int("n_towers"), p.get("capture_radius"), p.get("step"), p.get("turn_bound")};
}

class FlockingModel : public Model {
 public:
  void install(World& world, const ParamSet& params) override {
    world.add_behavior("flocking", [this, &params](World& w) {
      free_ = flocking_tick(w, flocking_params(params));
      if (free_ == 0 && assembled_at_ < 0) assembled_at_ = static_cast<double>(w.tick() + 1);
    });
    world.register_reporter("free_count", [this](const World&) { return static_cast<double>(free_); });
    world.register_reporter("assembly_ticks", [this](const World&) { return assembled_at_; });
  }

  void setup(World& world, const ParamSet& params) override {
    const auto fp = flocking_params(params);
    flocking_setup(world, fp);
    free_ = static_cast<std::size_t>(fp.n_nodes);
    assembled_at_ = fp.n_nodes == 0 ? 0.0 : -1.0;
  }

 private:
  std::size_t free_ = 0;
  double assembled_at_ = -1;
};

// ---------------------------------------------------------------------------

class ClusteringModel : public Model {
 public:
  void install(World& world, const ParamSet&) override {
    world.add_behavior("election", [this](World& w) {
      if (!election_ || election_->done()) return;
      election_->round();
      paint_clusters(w, *election_, sensing_);
    });
    world.register_reporter("n_heads", [this](const World&) {
      return election_ ? static_cast<double>(election_->head_count()) : 0.0;
    });
    world.register_reporter("undecided", [this](const World&) {
      return election_ ? static_cast<double>(election_->undecided()) : 0.0;
    });
    world.register_reporter("rounds", [this](const World&) {
      return election_ ? static_cast<double>(election_->rounds()) : 0.0;
    });
  }

  void setup(World& world, const ParamSet& params) override {
    const ClusterParams cp{params.get_int("n_nodes"), params.get("sensing_radius")};
    clustering_setup(world, cp);
    sensing_ = sensing_graph(world, cp.sensing_radius, "node");
    election_ = std::make_unique<ClusterElection>(sensing_.graph);
    for (Vertex v = 0; v < sensing_.ids.size(); ++v)
      for (Vertex u : sensing_.graph.neighbors(v))
        if (v < u) world.create_link(sensing_.ids[v], sensing_.ids[u]);
  }

 private:
  SensingGraph sensing_;
  std::unique_ptr<ClusterElection> election_;
};

// ---------------------------------------------------------------------------

std::vector<ParamSpec> overlay_params(std::size_t default_topology) {
  return {
      choice_param("topology", {"lattice", "random"}, default_topology, false, "overlay kind"),
      int_param("rows", 1, 100, 10, false, "lattice rows"),
      int_param("cols", 1, 100, 10, false, "lattice columns"),
      int_param("n", 1, 2000, 100, false, "random graph size"),
      real_param("edge_prob", 0, 1, 0.05, false, "random graph edge probability"),
      bool_param("require_connected", true, false, "retry random graphs until connected"),
      int_param("n_targets", 1, 100, 1, true, "nodes holding the resource per query"),
  };
}

/// Shared overlay handling for the two search models: one query per tick
/// between random distinct nodes.
class SearchModelBase : public Model {
 public:
  void install(World& world, const ParamSet& params) override {
    world.add_behavior("query", [this, &params](World& w) {
      if (graph_.size() < 2) return;
      auto& rng = w.rng();
      const auto source = static_cast<Vertex>(rng.below(graph_.size()));
      std::vector<Vertex> pool;
      for (Vertex v = 0; v < graph_.size(); ++v)
        if (v != source) pool.push_back(v);
      rng.shuffle(std::span<Vertex>(pool));
      pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(params.get_int("n_targets"))));
      std::sort(pool.begin(), pool.end());
      last_ = run_query(w, params, source, pool);
      ++queries_;
      total_messages_ += static_cast<double>(last_.messages + last_.check_messages);
      for (AgentId id : ids_) w.agent(id).color = colors::kWhite;
      for (Vertex t : pool) w.agent(ids_[t]).color = colors::kGreen;
      w.agent(ids_[source]).color = colors::kRed;
    });
    world.register_reporter("success", [this](const World&) { return last_.success ? 1.0 : 0.0; });
    world.register_reporter("messages", [this](const World&) { return static_cast<double>(last_.messages); });
    world.register_reporter("checks", [this](const World&) { return static_cast<double>(last_.check_messages); });
    world.register_reporter("hops", [this](const World&) { return none_as_minus_one(last_.hops_to_hit); });
    world.register_reporter("rings", [this](const World&) { return none_as_minus_one(last_.rings_used); });
    world.register_reporter("total_messages", [this](const World&) { return total_messages_; });
  }

  void setup(World& world, const ParamSet& params) override {
    OverlaySpec spec;
    spec.kind = params.get_choice("topology") == "lattice" ? OverlayKind::lattice : OverlayKind::random;
    spec.rows = params.get_int("rows");
    spec.cols = params.get_int("cols");
    spec.n = static_cast<std::size_t>(params.get_int("n"));
    spec.edge_probability = params.get("edge_prob");
    spec.require_connected = params.get_bool("require_connected");
    graph_ = build_overlay(spec, world.rng().next_u64());
    const bool lattice = spec.kind == OverlayKind::lattice;
    ids_ = embed_overlay(world, graph_, lattice ? Layout::grid : Layout::circle, lattice ? spec.cols : 0);
    last_ = {};
    queries_ = 0;
    total_messages_ = 0;
  }

 protected:
  virtual SearchOutcome run_query(World& world, const ParamSet& params, Vertex source,
                                  const std::vector<Vertex>& targets) = 0;

 private:
  Graph graph_;
  std::vector<AgentId> ids_;
  SearchOutcome last_;
  std::int64_t queries_ = 0;
  double total_messages_ = 0;

 protected:
  const Graph& graph() const { return graph_; }
};

class ExpandingRingModel : public SearchModelBase {
 protected:
  SearchOutcome run_query(World&, const ParamSet& params, Vertex source, const std::vector<Vertex>& targets) override {
    QueryConfig q;
    q.source = source;
    q.targets = targets;
    q.max_rings = params.get_int("max_rings");
    return expanding_ring_search(graph(), q);
  }
};

class KWalkModel : public SearchModelBase {
 protected:
  SearchOutcome run_query(World& world, const ParamSet& params, Vertex source,
                          const std::vector<Vertex>& targets) override {
    const WalkConfig wc{params.get_int("k"), params.get_int("check_interval"), params.get_int("ttl_max")};
    return k_random_walk(graph(), source, targets, wc, world.rng());
  }
};

// ---------------------------------------------------------------------------

class GradientModel : public Model {
 public:
  void install(World& world, const ParamSet& params) override {
    world.add_behavior("gradient", [this, &params](World& w) {
      const double step = params.get("step");
      if (step > 0) {
        ask(w, ids_, [&](World& w2, AgentId id) { random_walk_step(w2, id, params.get("turn_bound"), step); });
        graph_ = sensing_graph(w, params.get("radius"), "sensor").graph;
      }
      const int every = params.get_int("relocate_every");
      if (every > 0 && (w.tick() + 1) % every == 0) relocate(w, params);
      auto next = gradient_step(field_, graph_);
      changed_ = 0;
      for (std::size_t i = 0; i < next.values.size(); ++i)
        if (next.values[i] != field_.values[i]) ++changed_;
      field_ = std::move(next);
      paint(w);
    });
    world.register_reporter("max_value", [this](const World&) {
      double best = 0;
      for (double v : field_.values)
        if (std::isfinite(v)) best = std::max(best, v);
      return best;
    });
    world.register_reporter("unreached", [this](const World&) {
      return static_cast<double>(std::count(field_.values.begin(), field_.values.end(), kUnreached));
    });
    world.register_reporter("changed", [this](const World&) { return static_cast<double>(changed_); });
  }

  void setup(World& world, const ParamSet& params) override {
    world.create_agents("sensor", static_cast<std::size_t>(params.get_int("n_nodes")),
                        [&](Agent& a) { a.pos = random_position(world); });
    ids_ = all_agents(world, "sensor");
    graph_ = sensing_graph(world, params.get("radius"), "sensor").graph;
    field_ = GradientField::fresh(ids_.size(), pick_sources(world.rng(), params));
    changed_ = 0;
    paint(world);
  }

 private:
  std::vector<Vertex> pick_sources(Rng& rng, const ParamSet& params) const {
    std::vector<Vertex> all(ids_.size());
    for (Vertex v = 0; v < all.size(); ++v) all[v] = v;
    rng.shuffle(std::span<Vertex>(all));
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(params.get_int("n_sources"))));
    std::sort(all.begin(), all.end());
    return all;
  }

  void relocate(World& w, const ParamSet& params) { field_.relocate_sources(pick_sources(w.rng(), params)); }

  void paint(World& w) const {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      auto& a = w.agent(ids_[i]);
      const double v = field_.values[i];
      a.set_var("gradient", std::isfinite(v) ? v : -1.0);
      a.color = v == 0 ? colors::kRed : std::isfinite(v) ? colors::kSky - 4.0 + std::min(v, 8.9) : colors::kGray;
    }
  }

  std::vector<AgentId> ids_;
  Graph graph_;
  GradientField field_;
  std::size_t changed_ = 0;
};

// ---------------------------------------------------------------------------

class ConsensusModel : public Model {
 public:
  void install(World& world, const ParamSet& params) override {
    world.add_behavior("consensus", [&params](World& w) {
      consensus_mobility_tick(w, {params.get("radius"), params.get("step"), params.get("turn_bound")});
      for (const auto& a : w.agents())
        if (a.alive) w.set_color(a.id, a.var("value"));
    });
    world.register_reporter("range", [](const World& w) { return spread(w).range; });
    world.register_reporter("variance", [](const World& w) { return spread(w).variance; });
    world.register_reporter("mean", [](const World& w) { return spread(w).mean; });
  }

  void setup(World& world, const ParamSet& params) override {
    world.create_agents("node", static_cast<std::size_t>(params.get_int("n_nodes")), [&](Agent& a) {
      a.pos = random_position(world);
      const double v = world.rng().uniform(0.0, 100.0);
      a.set_var("value", v);
      a.color = v;
    });
  }

 private:
  static Spread spread(const World& w) {
    std::vector<double> x;
    for (const auto& a : w.agents())
      if (a.alive) x.push_back(a.var("value"));
    return spread_of(x);
  }
};

std::vector<ModelInfo> build_catalog() {
  std::vector<ModelInfo> c;
  c.push_back({"tutorial",
               "turtles at random patches drifting forward; patches share one random color",
               {int_param("n_turtles", 0, 100000, 100, false, "turtles created at setup"),
                real_param("step", 0, 10, 0.001, true, "forward step per tick")},
               [] { return std::make_unique<TutorialModel>(); }});
  c.push_back({"flocking",
               "mobile nodes random-walk until captured by a tower's radius, then take its color",
               {int_param("n_nodes", 0, 100000, 100, false, "mobile nodes"),
                int_param("n_towers", 1, 13, 5, false, "fixed towers (distinct colors)"),
                real_param("capture_radius", 0.01, 100, 3, false, "capture radius in patches"),
                real_param("step", 0.0001, 10, 0.1, true, "walk step per tick"),
                real_param("turn_bound", 0, 180, 45, true, "max turn per tick in degrees")},
               [] { return std::make_unique<FlockingModel>(); }});
  c.push_back({"clustering",
               "lowest-id clusterhead election over the sensing graph, one round per tick",
               {int_param("n_nodes", 1, 100000, 100, false, "nodes"),
                real_param("sensing_radius", 0.01, 100, 3, false, "sensing radius in patches")},
               [] { return std::make_unique<ClusteringModel>(); }});
  auto ring_params = overlay_params(0);
  ring_params.push_back(int_param("max_rings", 1, 1000, 16, true, "rings tried (ttl 1, 3, 5, ...)"));
  c.push_back({"expanding-ring", "expanding-ring flooding queries, one per tick", std::move(ring_params),
               [] { return std::make_unique<ExpandingRingModel>(); }});
  auto walk_params = overlay_params(1);
  walk_params.push_back(int_param("k", 1, 1000, 16, true, "random walkers"));
  walk_params.push_back(int_param("check_interval", 1, 1000, 4, true, "hops between checks"));
  walk_params.push_back(int_param("ttl_max", 1, 1000000, 1000, true, "hop budget per walker"));
  c.push_back({"k-walk", "k-random-walk-with-check queries, one per tick", std::move(walk_params),
               [] { return std::make_unique<KWalkModel>(); }});
  c.push_back({"gradient",
               "hop-count gradient around source sensors, self-healing when sources move",
               {int_param("n_nodes", 1, 100000, 200, false, "sensors"),
                real_param("radius", 0.01, 100, 3, false, "radio range in patches"),
                int_param("n_sources", 0, 1000, 1, false, "source sensors"),
                int_param("relocate_every", 0, 100000, 0, true, "move sources every N ticks (0 = never)"),
                real_param("step", 0, 10, 0, true, "sensor walk step (0 = static)"),
                real_param("turn_bound", 0, 180, 45, true, "max turn per tick in degrees")},
               [] { return std::make_unique<GradientModel>(); }});
  c.push_back({"consensus",
               "distributed averaging among mobile nodes over the proximity graph",
               {int_param("n_nodes", 1, 100000, 1000, false, "nodes"),
                real_param("radius", 0.01, 100, 2, true, "interaction radius in patches"),
                real_param("step", 0, 10, 0.1, true, "walk step per tick"),
                real_param("turn_bound", 0, 180, 45, true, "max turn per tick in degrees")},
               [] { return std::make_unique<ConsensusModel>(); }});
  return c;
}

}  // namespace

const std::vector<ModelInfo>& model_catalog() {
  static const std::vector<ModelInfo> catalog = build_catalog();
  return catalog;
}

}  // namespace sosim
