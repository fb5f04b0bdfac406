// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "net_client.hpp"
#include "oracles.hpp"
#include "program_gen.hpp"
#include "sosim/agentset.hpp"
#include "sosim/colors.hpp"
#include "sosim/console/interpreter.hpp"
#include "sosim/field.hpp"
#include "sosim/model.hpp"
#include "sosim/search.hpp"
#include "sosim/selforg.hpp"
#include "sosim/series.hpp"
#include "sosim/server/replay.hpp"
#include "sosim/server/tcp_server.hpp"

#ifndef SOSIM_BIN
#error "SOSIM_BIN must name the sosim executable"
#endif
#ifndef SOSIM_CONFIGS
#error "SOSIM_CONFIGS must name the configs directory"
#endif

using namespace sosim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Collects failures without stopping at the first one.
struct Checker {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  Outcome outcome(std::string detail) const {
    if (failed == 0) return {true, std::move(detail)};
    std::string msg = std::to_string(failed) + " failed checks; first: ";
    for (std::size_t i = 0; i < failures.size(); ++i) msg += (i ? " | " : "") + failures[i];
    return {false, msg};
  }
  int failed = 0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("sosim_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

const std::vector<std::string> kShipped = {"flocking", "clustering", "expanding-ring", "k-walk", "gradient", "consensus"};

// ---------------------------------------------------------------------------

Outcome a1_determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = scratch_dir() / "a1";
  fs::create_directories(dir);
  Checker c;
  for (const auto& model : kShipped) {
    std::string csv[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / (model + "_" + std::to_string(rep) + ".csv");
      const std::string cmd = std::string("\"") + SOSIM_BIN + "\" run --model " + model + " --config \"" + SOSIM_CONFIGS +
                              "/" + model + ".json\" --ticks 200 --seed 42 --out \"" + out.string() + "\"";
      const int rc = std::system(cmd.c_str());
      c.expect(rc == 0, model + ": run exited with " + std::to_string(rc));
      if (rc == 0) csv[rep] = read_text_file(out.string());
    }
    c.expect(!csv[0].empty() && csv[0] == csv[1], model + ": CSVs differ");
    c.expect(std::count(csv[0].begin(), csv[0].end(), '\n') == 201, model + ": expected 200 rows");
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60, "runtime " + fmt("%.1fs", secs));
  fs::remove_all(dir);
  return c.outcome("6 models x 2 runs of 200 ticks byte-identical in " + fmt("%.1fs", secs));
}

Outcome a2_tutorial() {
  Checker c;
  RunConfig rc = RunConfig::load(std::string(SOSIM_CONFIGS) + "/tutorial.json");
  rc.world.seed = 11;
  Simulation sim(rc);
  sim.setup();
  World& w = sim.world();
  console::Interpreter in(w);
  c.expect(w.agent_count() == 100, "agent count " + std::to_string(w.agent_count()));
  c.expect(in.execute("count turtles") == "100", "count turtles");

  // random 140 through the console
  const int draws = 100000, bins = 140;
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < draws; ++i) {
    const double v = std::stod(in.execute("random 140"));
    if (v < 0 || v >= bins || v != std::floor(v)) {
      c.expect(false, "random 140 gave " + std::to_string(v));
      continue;
    }
    ++counts[static_cast<int>(v)];
  }
  const double expected = static_cast<double>(draws) / bins;
  double chi2 = 0;
  for (int k : counts) chi2 += (k - expected) * (k - expected) / expected;
  const double p = boost::math::gamma_q((bins - 1) / 2.0, chi2 / 2.0);
  c.expect(p > 0.001, "chi-squared p = " + fmt("%.3g", p));

  // fd 0.001 each tick: closed-form position after t ticks
  const double step = sim.params().get("step");
  struct Start {
    Vec2 pos;
    double heading;
  };
  std::vector<Start> start;
  for (const auto& a : w.agents()) start.push_back({a.pos, a.heading});
  double worst = 0;
  for (int t = 1; t <= 10; ++t) {
    sim.step();
    for (const auto& a : w.agents()) {
      const Start& s = start[a.id];
      const double rad = s.heading * M_PI / 180.0;
      const Vec2 want{s.pos.x + t * step * std::sin(rad), s.pos.y + t * step * std::cos(rad)};
      worst = std::max(worst, w.distance(want, a.pos));
      c.expect(a.heading == s.heading, "heading changed");
    }
  }
  c.expect(worst <= 1e-12, "position error " + fmt("%.3g", worst));
  return c.outcome("100 agents; chi2 = " + fmt("%.1f", chi2) + ", p = " + fmt("%.3f", p) +
                   "; max position error over 10 ticks " + fmt("%.2g", worst));
}

void check_election(Checker& c, const Graph& g, const std::string& tag) {
  ClusterElection e(g);
  e.run();
  const auto greedy = oracle::greedy_clusters(g);
  for (Vertex v = 0; v < g.size(); ++v) {
    const bool head = e.role(v) == ClusterElection::Role::head;
    c.expect(head == greedy.heads.contains(v), tag + ": head set differs at " + std::to_string(v));
    if (!head) c.expect(e.role(v) == ClusterElection::Role::member && e.head_of(v) == greedy.member_of.at(v),
                        tag + ": membership differs at " + std::to_string(v));
    for (Vertex u : g.neighbors(v))
      c.expect(!(head && e.role(u) == ClusterElection::Role::head), tag + ": adjacent heads");
  }
  if (g.size() > 0) c.expect(e.role(0) == ClusterElection::Role::head, tag + ": min id not a head");
}

Outcome a3_clustering() {
  const auto t0 = std::chrono::steady_clock::now();
  Checker c;
  std::uint64_t exhaustive = 0;
  for (int n = 1; n <= 6; ++n)
    for (std::uint64_t m = 0; m < oracle::graph_count(n); ++m, ++exhaustive)
      check_election(c, oracle::graph_from_mask(n, m), "n=" + std::to_string(n) + " mask=" + std::to_string(m));
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + static_cast<int>(rng.below(49));
    check_election(c, oracle::random_geometric(n, 10, 1 + rng.uniform() * 3, rng), "geometric " + std::to_string(i));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 30, "runtime " + fmt("%.1fs", secs));
  return c.outcome(std::to_string(exhaustive) + " exhaustive graphs + 200 geometric match the greedy oracle in " +
                   fmt("%.1fs", secs));
}

void check_ring(Checker& c, const Graph& g, Vertex s, Vertex t, const std::string& tag) {
  QueryConfig q;
  q.source = s;
  q.targets = {t};
  q.max_rings = 32;
  const auto out = expanding_ring_search(g, q);
  const int d = oracle::bfs(g, {s})[t];
  c.expect(out.success, tag + ": not found");
  if (!out.success) return;
  const int want_ttl = d % 2 == 1 ? d : d + 1;
  if (d > 0) c.expect(out.ttl_used == want_ttl, tag + ": ttl " + std::to_string(out.ttl_used.value_or(-1)) +
                                                    " for distance " + std::to_string(d));
  const auto ttls = odd_ttl_sequence(static_cast<int>(out.ring_messages.size()));
  std::int64_t total = 0;
  for (std::size_t i = 0; i < out.ring_messages.size(); ++i) {
    const auto ref = oracle::flood(g, s, {t}, ttls[i]);
    c.expect(out.ring_messages[i] == ref.messages, tag + ": ring " + std::to_string(i + 1) + " messages " +
                                                        std::to_string(out.ring_messages[i]) + " vs " +
                                                        std::to_string(ref.messages));
    total += ref.messages;
  }
  c.expect(out.messages == total, tag + ": total messages");
}

Outcome a4_expanding_ring() {
  const auto t0 = std::chrono::steady_clock::now();
  Checker c;
  Rng rng(404);
  const Graph lat = oracle::lattice(20, 20);
  for (int i = 0; i < 100; ++i) {
    const auto s = static_cast<Vertex>(rng.below(400));
    auto t = static_cast<Vertex>(rng.below(399));
    if (t >= s) ++t;
    check_ring(c, lat, s, t, "lattice query " + std::to_string(i));
  }
  check_ring(c, lat, 0, 399, "lattice corners");
  for (int i = 0; i < 100; ++i) {
    const Graph g = oracle::random_connected(100, 0.04, rng);
    const auto s = static_cast<Vertex>(rng.below(100));
    auto t = static_cast<Vertex>(rng.below(99));
    if (t >= s) ++t;
    check_ring(c, g, s, t, "random graph " + std::to_string(i));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 30, "runtime " + fmt("%.1fs", secs));
  return c.outcome("101 lattice queries + 100 random graphs: ttl and per-ring messages match the enumerator in " +
                   fmt("%.1fs", secs));
}

Outcome a5_k_walk() {
  Checker c;
  const WalkConfig wc{16, 4, 1000};
  int successes = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    OverlaySpec spec;
    spec.kind = OverlayKind::random;
    spec.n = 100;
    spec.edge_probability = 0.05;
    spec.require_connected = true;
    const Graph g = build_overlay(spec, seed);
    c.expect(is_connected(g), "seed " + std::to_string(seed) + ": overlay not connected");
    Rng rng = Rng::substream(seed, "query", 0);
    const auto target = static_cast<Vertex>(1 + rng.below(99));
    const auto out = k_random_walk(g, 0, {target}, wc, rng);
    successes += out.success ? 1 : 0;
    std::int64_t hops = 0, checks = 0;
    for (const auto& w : out.walkers) {
      c.expect(w.checks == w.hops / wc.check_interval, "seed " + std::to_string(seed) + ": checks != floor(hops/c)");
      c.expect(w.hops <= wc.ttl_max, "seed " + std::to_string(seed) + ": walker exceeded ttl_max");
      hops += w.hops;
      checks += w.checks;
    }
    c.expect(out.walkers.size() == 16, "walker count");
    c.expect(out.messages == hops && out.check_messages == checks, "totals");
  }
  c.expect(successes >= 99, "successes " + std::to_string(successes) + "/100");
  return c.outcome(std::to_string(successes) + "/100 seeds found the target; all walkers within ttl, checks = floor(hops/4)");
}

void check_gradient(Checker& c, const Graph& g, const std::vector<Vertex>& sources, const std::string& tag) {
  const auto run = gradient_run(GradientField::fresh(g.size(), sources), g, 10000);
  c.expect(run.converged, tag + ": no fixed point");
  const auto d = oracle::bfs(g, sources);
  for (Vertex v = 0; v < g.size(); ++v) {
    const double want = d[v] < 0 ? kUnreached : d[v];
    c.expect(run.field.values[v] == want, tag + ": value at " + std::to_string(v));
  }
}

Outcome a6_gradient() {
  Checker c;
  std::uint64_t cases = 0;
  for (int n = 1; n <= 6; ++n)
    for (std::uint64_t m = 0; m < oracle::graph_count(n); ++m) {
      const Graph g = oracle::graph_from_mask(n, m);
      for (Vertex s = 0; s < static_cast<Vertex>(n); ++s, ++cases)
        check_gradient(c, g, {s}, "n=" + std::to_string(n) + " mask=" + std::to_string(m));
    }
  Rng rng(606);
  for (int i = 0; i < 100; ++i) {
    const int n = 20 + static_cast<int>(rng.below(181));
    const Graph g = oracle::random_geometric(n, 12, 1.5 + rng.uniform() * 2, rng);
    const auto k = 1 + rng.below(3);
    std::vector<Vertex> sources;
    for (std::uint64_t j = 0; j < k; ++j) sources.push_back(static_cast<Vertex>(rng.below(n)));
    check_gradient(c, g, sources, "geometric " + std::to_string(i));
  }
  // relocation on connected graphs
  int worst_slack = 1 << 30;
  for (int i = 0; i < 100; ++i) {
    const Graph g = oracle::random_connected(100, 0.04, rng);
    auto field = gradient_run(GradientField::fresh(100, {0}), g, 10000).field;
    const auto to = static_cast<Vertex>(1 + rng.below(99));
    field.relocate_sources({to});
    const auto truth = oracle::bfs(g, {to});
    double stale_under = 0;
    for (Vertex v = 0; v < g.size(); ++v) stale_under = std::max(stale_under, truth[v] - field.values[v]);
    const auto healed = gradient_run(field, g, 10000);
    c.expect(healed.converged, "relocation " + std::to_string(i) + ": no fixed point");
    for (Vertex v = 0; v < g.size(); ++v)
      c.expect(healed.field.values[v] == truth[v], "relocation " + std::to_string(i) + ": wrong value");
    const int bound = static_cast<int>(stale_under) + oracle::eccentricity_bound(g) + 1;
    c.expect(healed.steps <= bound, "relocation " + std::to_string(i) + ": " + std::to_string(healed.steps) +
                                        " steps > bound " + std::to_string(bound));
    worst_slack = std::min(worst_slack, bound - healed.steps);
  }
  return c.outcome(std::to_string(cases) + " exhaustive (graph, source) pairs + 100 geometric equal BFS; 100 relocations "
                   "healed within bound (min slack " + std::to_string(worst_slack) + ")");
}

std::vector<double> values_of(const World& w) {
  std::vector<double> x;
  for (const auto& a : w.agents())
    if (a.alive) x.push_back(a.var("value"));
  return x;
}

Outcome a7_consensus() {
  Checker c;
  RunConfig rc = RunConfig::load(std::string(SOSIM_CONFIGS) + "/consensus.json");
  rc.params["n_nodes"] = 200;
  rc.world.seed = 77;
  Simulation sim(rc);
  sim.setup();
  auto s = spread_of(values_of(sim.world()));
  const double m0 = s.mean;
  double worst_rel = 0;
  int widened = 0;
  for (int t = 0; t < 10000; ++t) {
    sim.step();
    const auto next = spread_of(values_of(sim.world()));
    worst_rel = std::max(worst_rel, std::abs(next.mean - m0) / std::abs(m0));
    if (next.range > s.range) ++widened;
    s = next;
  }
  c.expect(worst_rel <= 1e-9, "mean drift " + fmt("%.3g", worst_rel));
  c.expect(widened == 0, "range grew on " + std::to_string(widened) + " steps");

  Rng rng(707);
  const Graph g = oracle::random_connected(100, 0.05, rng);
  ConsensusState cs;
  for (int v = 0; v < 100; ++v) cs.x.push_back(rng.uniform(0, 100));
  cs.epsilon = max_epsilon(g);
  const double mean = std::accumulate(cs.x.begin(), cs.x.end(), 0.0) / 100;
  auto deviation = [&] {
    double d = 0;
    for (double v : cs.x) d = std::max(d, std::abs(v - mean));
    return d;
  };
  int steps = 0;
  while (deviation() >= 1e-3 && steps < 1000000) {
    cs = consensus_step(cs, g);
    ++steps;
  }
  c.expect(deviation() < 1e-3, "static graph deviation " + fmt("%.3g", deviation()));
  return c.outcome("10^4 mobile steps: mean drift " + fmt("%.2g", worst_rel) + ", range never grew; static n=100 below 1e-3 after " +
                   std::to_string(steps) + " steps");
}

double ticks_per_second(const std::function<void()>& tick, int n) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n; ++i) tick();
  return n / seconds_since(t0);
}

Outcome a8_throughput() {
  Checker c;
  RunConfig rc = RunConfig::load(std::string(SOSIM_CONFIGS) + "/consensus.json");
  rc.params["n_nodes"] = 1000;
  Simulation sim(rc);
  sim.setup();
  const double consensus_rate = ticks_per_second([&] { sim.step(); }, 300);
  c.expect(sim.world().agent_count() == 1000, "consensus agent count");
  c.expect(consensus_rate >= 100, "consensus " + fmt("%.0f ticks/s", consensus_rate));

  World w(WorldConfig{100, 100, true, 8, {}});
  w.create_agents("node", 10000, [&](Agent& a) { a.pos = random_position(w); });
  w.add_behavior("walk", [](World& world) {
    ask(world, all_agents(world), [](World& w2, AgentId id) { random_walk_step(w2, id, 45, 0.1); });
  });
  const double walk_rate = ticks_per_second([&] { w.step(); }, 100);
  c.expect(walk_rate >= 50, "random walk " + fmt("%.0f ticks/s", walk_rate));
  return c.outcome("consensus n=1000: " + fmt("%.0f", consensus_rate) + " ticks/s; 10,000-agent random walk: " +
                   fmt("%.0f", walk_rate) + " ticks/s");
}

Outcome a9_console() {
  Checker c;
  World w(WorldConfig{33, 33, true, 9, {}});
  w.create_agents("node", 500, [&](Agent& a) {
    a.pos = random_position(w);
    a.set_var("power", w.rng().uniform());
  });
  std::vector<double> before;
  for (const auto& a : w.agents()) before.push_back(a.color);
  console::Interpreter(w).run("ask nodes with [power < 0.5] [set color green]");
  int matched = 0;
  for (const auto& a : w.agents()) {
    const bool low = a.var("power") < 0.5;
    matched += low ? 1 : 0;
    c.expect(a.color == (low ? colors::kGreen : before[a.id]), "agent " + std::to_string(a.id) + " color");
  }

  gen::ProgramGen g(2025);
  for (int i = 0; i < 1000; ++i) {
    const std::string src = g.program();
    try {
      const auto p = console::parse(src);
      const std::string printed = console::print(p);
      const auto again = console::parse(printed);
      c.expect(console::print(again) == printed, "round trip text: " + src);
      c.expect(p.size() == again.size(), "round trip shape: " + src);
      for (std::size_t k = 0; k < p.size() && k < again.size(); ++k)
        c.expect(console::same_shape(p[k], again[k]), "round trip shape: " + src);
    } catch (const std::exception& e) {
      c.expect(false, "generated program failed: " + src + ": " + e.what());
    }
  }

  int positioned = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string bad = g.mutate(g.program());
    World scratch(WorldConfig{33, 33, true, 3, {}});
    scratch.create_agents("node", 5);
    try {
      console::Interpreter(scratch).run(bad);
      c.expect(false, "mutation ran: " + bad);
    } catch (const console::ConsoleError& e) {
      const bool ok = e.span().line >= 1 && e.span().column >= 1 && e.span().offset <= bad.size();
      positioned += ok ? 1 : 0;
      c.expect(ok, "unpositioned error for: " + bad);
    } catch (const std::exception& e) {
      c.expect(false, "non-console error for " + bad + ": " + e.what());
    }
  }
  return c.outcome(std::to_string(matched) + "/500 low-power nodes recolored, others untouched; 1000 round trips; " +
                   std::to_string(positioned) + "/100 mutations gave positioned errors");
}

Outcome a10_replay() {
  Checker c;
  const fs::path dir = scratch_dir() / "a10";
  fs::create_directories(dir);
  RunConfig rc;
  rc.model = "consensus";
  rc.world.seed = 1010;
  rc.params = {{"n_nodes", 150}};
  server::ServerOptions opt;
  opt.session.frame_rate = 20;
  opt.session.tick_rate = 200;
  opt.log_path = (dir / "session.log").string();
  opt.metrics_out = (dir / "live.csv").string();
  server::TcpServer srv(rc, opt);
  std::thread owner([&] { srv.run(); });
  std::int64_t last_tick = 0;
  try {
    testnet::LineClient cl(srv.port());
    cl.expect("schema");
    auto wait_ticks = [&](std::int64_t until) {
      while (last_tick < until) last_tick = cl.expect("metrics")["tick"];
    };
    cl.send({{"id", 1}, {"type", "control"}, {"action", "setup"}});
    cl.expect("ack", 1);
    cl.send({{"id", 2}, {"type", "control"}, {"action", "go"}});
    cl.expect("ack", 2);
    const std::vector<std::string> commands = {"ask nodes with [ who < 20 ] [ set value 500 ]",
                                               "ask one-of nodes [ setxy 0 0 rt 90 ]",
                                               "ask nodes with [ value > 60 ] [ fd 1 ]"};
    for (std::size_t i = 0; i < commands.size(); ++i) {
      wait_ticks(last_tick + 15);
      const int id = 10 + static_cast<int>(i);
      cl.send({{"id", id}, {"type", "command"}, {"text", commands[i]}});
      cl.expect("ack", id);
    }
    wait_ticks(last_tick + 15);
    cl.send({{"id", 3}, {"type", "control"}, {"action", "stop"}});
    cl.expect("ack", 3);
  } catch (const std::exception& e) {
    c.expect(false, std::string("session: ") + e.what());
  }
  srv.stop();
  owner.join();

  const std::string live = read_text_file(opt.metrics_out);
  const std::string replayed = to_csv(server::replay(server::load_run_log(opt.log_path)));
  c.expect(live == replayed, "in-process replay differs from the live CSV");
  const fs::path cli_out = dir / "replayed.csv";
  const std::string cmd = std::string("\"") + SOSIM_BIN + "\" replay --log \"" + opt.log_path + "\" --out \"" +
                          cli_out.string() + "\"";
  c.expect(std::system(cmd.c_str()) == 0, "sosim replay failed");
  c.expect(fs::exists(cli_out) && read_text_file(cli_out.string()) == live, "sosim replay CSV differs");
  const auto rows = std::count(live.begin(), live.end(), '\n') - 1;
  c.expect(rows >= 60, "only " + std::to_string(rows) + " ticks recorded");
  std::size_t commands_logged = 0;
  for (const auto& r : server::load_run_log(opt.log_path)) commands_logged += r["type"] == "command" ? 1 : 0;
  c.expect(commands_logged == 3, "commands logged: " + std::to_string(commands_logged));
  fs::remove_all(dir);
  return c.outcome("session of " + std::to_string(rows) + " ticks with 3 live commands replays to an identical CSV");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1 determinism", a1_determinism},   {"A2 tutorial fidelity", a2_tutorial},
      {"A3 clustering", a3_clustering},     {"A4 expanding ring", a4_expanding_ring},
      {"A5 k-walk", a5_k_walk},             {"A6 gradient", a6_gradient},
      {"A7 consensus", a7_consensus},       {"A8 throughput", a8_throughput},
      {"A9 console", a9_console},           {"A10 steered-run replay", a10_replay},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  fs::remove_all(scratch_dir());
  return failed == 0 ? 0 : 1;
}
