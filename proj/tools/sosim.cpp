#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sosim/console/interpreter.hpp"
#include "sosim/graph.hpp"
#include "sosim/model.hpp"
#include "sosim/search.hpp"
#include "sosim/server/replay.hpp"
#include "sosim/server/tcp_server.hpp"
#include "sosim/sweep.hpp"

using namespace sosim;
using nlohmann::json;

namespace {

server::TcpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

/// --config file (optional) with --model and --seed layered on top.
RunConfig load_config(const std::string& model, const std::string& path, std::optional<std::uint64_t> seed,
                      const std::vector<std::string>& sets) {
  RunConfig config;
  if (!path.empty()) config = RunConfig::load(path);
  if (!model.empty()) {
    if (!config.model.empty() && config.model != model)
      throw ConfigError("config is for model " + config.model + ", not " + model);
    config.model = model;
  }
  if (config.model.empty()) throw ConfigError("no model given");
  find_model(config.model);
  if (seed) config.world.seed = *seed;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects name=value, got " + s);
    json value;
    try {
      value = json::parse(s.substr(eq + 1));
    } catch (const json::parse_error&) {
      value = s.substr(eq + 1);
    }
    config.params[s.substr(0, eq)] = value;
  }
  return config;
}

int cmd_models() {
  for (const auto& m : model_catalog()) {
    std::printf("%s: %s\n", m.name.c_str(), m.summary.c_str());
    const auto defaults = m.default_params().to_json();
    for (const auto& p : m.params)
      std::printf("  %-18s %s%s  %s\n", p.name.c_str(), defaults.at(p.name).dump().c_str(), p.live ? " (live)" : "",
                  p.doc.c_str());
  }
  return 0;
}

int cmd_repl(const RunConfig& config) {
  Simulation sim(config);
  sim.setup();
  console::Interpreter interp(sim.world());
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const std::string text = line.substr(first);
    if (text == "exit" || text == "quit") break;
    try {
      if (text == "setup") {
        sim.setup();
        continue;
      }
      if (text == "go" || text.rfind("go ", 0) == 0) {
        const long n = text == "go" ? 1 : std::stol(text.substr(3));
        for (long i = 0; i < n && !sim.finished(); ++i) sim.step();
        std::printf("tick %lld\n", static_cast<long long>(sim.world().tick()));
        continue;
      }
      const std::string out = interp.execute(text);
      if (!out.empty()) std::printf("%s\n", out.c_str());
    } catch (const console::ConsoleError& e) {
      std::printf("error: %s\n", e.describe().c_str());
    } catch (const std::exception& e) {
      std::printf("error: %s\n", e.what());
    }
    std::fflush(stdout);
  }
  return 0;
}

struct SearchArgs {
  std::string algo = "ring";
  std::string topology = "random";
  int rows = 20;
  int cols = 20;
  int n = 100;
  double p = 0.05;
  int k = 16;
  int c = 4;
  int ttl = 1000;
  int rings = 16;
  int graphs = 10;
  int queries = 10;
  int targets = 1;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_search(const SearchArgs& a) {
  if (a.algo != "ring" && a.algo != "kwalk") throw ConfigError("--algo must be ring or kwalk");
  OverlaySpec spec;
  spec.kind = a.topology == "lattice" ? OverlayKind::lattice : OverlayKind::random;
  if (a.topology != "lattice" && a.topology != "random") throw ConfigError("--topology must be lattice or random");
  spec.rows = a.rows;
  spec.cols = a.cols;
  spec.n = a.n;
  spec.edge_probability = a.p;
  spec.require_connected = true;
  WalkConfig walk{a.k, a.c, a.ttl};
  if (a.algo == "kwalk") walk.validate();

  const std::string dims = spec.kind == OverlayKind::lattice
                               ? std::to_string(a.rows) + "x" + std::to_string(a.cols)
                               : format_real(a.p);
  std::string csv = "seed,n,p_or_dims,k,c,ttl,success,messages,checks,hops,rings\n";
  for (int g = 0; g < a.graphs; ++g) {
    const std::uint64_t seed = derive_seed(a.seed, static_cast<std::uint64_t>(g));
    const Graph graph = build_overlay(spec, seed);
    const auto n = static_cast<std::uint64_t>(graph.size());
    if (static_cast<int>(n) <= a.targets) throw ConfigError("--targets must be below the node count");
    for (int q = 0; q < a.queries; ++q) {
      Rng rng = Rng::substream(seed, "query", static_cast<std::uint64_t>(q));
      const auto source = static_cast<Vertex>(rng.below(n));
      std::vector<Vertex> targets;
      while (static_cast<int>(targets.size()) < a.targets) {
        const auto t = static_cast<Vertex>(rng.below(n));
        if (t != source && std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
      }
      SearchOutcome out;
      if (a.algo == "ring") {
        QueryConfig query;
        query.source = source;
        query.targets = targets;
        query.max_rings = a.rings;
        out = expanding_ring_search(graph, query);
      } else {
        out = k_random_walk(graph, source, targets, walk, rng);
      }
      const bool ring = a.algo == "ring";
      csv += std::to_string(seed) + "," + std::to_string(n) + "," + dims + "," + (ring ? "" : std::to_string(a.k)) +
             "," + (ring ? "" : std::to_string(a.c)) + "," +
             (ring ? (out.ttl_used ? std::to_string(*out.ttl_used) : "") : std::to_string(a.ttl)) + "," +
             (out.success ? "1" : "0") + "," + std::to_string(out.messages) + "," +
             std::to_string(out.check_messages) + "," + (out.hops_to_hit ? std::to_string(*out.hops_to_hit) : "") +
             "," + (out.rings_used ? std::to_string(*out.rings_used) : "") + "\n";
    }
  }
  if (a.out.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    write_text_file(a.out, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sosim: deterministic agent-based simulator for self-organizing networks"};
  app.require_subcommand(1);

  std::string model, config_path, out, spec_path, log_path, metrics_out, host = "127.0.0.1";
  std::int64_t ticks = 100;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  int port = 7070;
  double frame_rate = 20, tick_rate = 60;

  auto* run = app.add_subcommand("run", "run a model headless and write its metrics CSV");
  run->add_option("--model", model, "model name");
  run->add_option("--config", config_path, "run config JSON");
  run->add_option("--ticks", ticks, "ticks to run")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "world seed");
  run->add_option("--set", sets, "parameter override name=value (repeatable)");
  run->add_option("--out", out, "metrics CSV path")->required();

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("--spec", spec_path, "sweep JSON")->required();
  sweep->add_option("--out", out, "output directory")->required();

  auto* serve = app.add_subcommand("serve", "serve a live, steerable run over TCP");
  serve->add_option("--model", model, "model name");
  serve->add_option("--config", config_path, "run config JSON");
  serve->add_option("--seed", seed, "world seed");
  serve->add_option("--set", sets, "parameter override name=value (repeatable)");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--frame-rate", frame_rate, "frames per second while running (0 = every tick)");
  serve->add_option("--tick-rate", tick_rate, "ticks per second while running (0 = unthrottled)");
  serve->add_option("--log", log_path, "write the run log here");
  serve->add_option("--metrics-out", metrics_out, "write the metrics CSV here on shutdown");

  auto* repl = app.add_subcommand("repl", "interactive console on stdin");
  repl->add_option("--model", model, "model name")->required();
  repl->add_option("--config", config_path, "run config JSON");
  repl->add_option("--seed", seed, "world seed");

  auto* replay = app.add_subcommand("replay", "replay a run log headless");
  replay->add_option("--log", log_path, "run log")->required();
  replay->add_option("--out", out, "metrics CSV path")->required();

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "per-query search costs on generated overlays");
  search->add_option("--algo", sa.algo, "ring or kwalk");
  search->add_option("--topology", sa.topology, "lattice or random");
  search->add_option("--rows", sa.rows);
  search->add_option("--cols", sa.cols);
  search->add_option("--n", sa.n, "nodes (random topology)");
  search->add_option("--p", sa.p, "edge probability (random topology)");
  search->add_option("--k", sa.k, "walkers");
  search->add_option("--c", sa.c, "check interval");
  search->add_option("--ttl", sa.ttl, "walker ttl");
  search->add_option("--rings", sa.rings, "maximum rings");
  search->add_option("--graphs", sa.graphs, "overlays to generate");
  search->add_option("--queries", sa.queries, "queries per overlay");
  search->add_option("--targets", sa.targets, "targets per query");
  search->add_option("--seed", sa.seed);
  search->add_option("--out", sa.out, "CSV path (default stdout)");

  auto* models = app.add_subcommand("models", "list models and their parameters");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const Series series = run_model(load_config(model, config_path, seed, sets), ticks);
      export_csv(series, out);
    } else if (*sweep) {
      const SweepSpec spec = SweepSpec::load(spec_path);
      const auto records = run_experiment(spec);
      write_sweep_outputs(out, spec, records);
      std::size_t failed = 0;
      for (const auto& r : records) failed += r.ok ? 0 : 1;
      std::printf("%zu runs, %zu failed\n", records.size(), failed);
      return failed == 0 ? 0 : 2;
    } else if (*serve) {
      server::ServerOptions options;
      options.host = host;
      options.port = port;
      options.session.frame_rate = frame_rate;
      options.session.tick_rate = tick_rate;
      options.log_path = log_path;
      options.metrics_out = metrics_out;
      server::TcpServer srv(load_config(model, config_path, seed, sets), options);
      g_server = &srv;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on %s:%d\n", host.c_str(), srv.port());
      std::fflush(stdout);
      srv.run();
      g_server = nullptr;
    } else if (*repl) {
      return cmd_repl(load_config(model, config_path, seed, {}));
    } else if (*replay) {
      export_csv(server::replay(server::load_run_log(log_path)), out);
    } else if (*search) {
      return cmd_search(sa);
    } else if (*models) {
      return cmd_models();
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sosim: %s\n", e.what());
    return 1;
  }
  return 0;
}
