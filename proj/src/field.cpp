#include "sosim/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sosim/agentset.hpp"
#include "sosim/error.hpp"
#include "sosim/selforg.hpp"

namespace sosim {

GradientField GradientField::fresh(std::size_t n, std::vector<Vertex> sources) {
  GradientField f;
  f.values.assign(n, kUnreached);
  f.relocate_sources(std::move(sources));
  return f;
}

void GradientField::relocate_sources(std::vector<Vertex> new_sources) {
  sources = std::move(new_sources);
  for (Vertex s : sources) values.at(s) = 0;
}

GradientField gradient_step(const GradientField& field, const Graph& graph) {
  if (field.values.size() != graph.size()) throw EvalError("gradient field size does not match graph");
  GradientField next;
  next.sources = field.sources;
  next.values.assign(graph.size(), kUnreached);
  std::vector<char> is_source(graph.size(), 0);
  for (Vertex s : field.sources) is_source.at(s) = 1;
  for (Vertex v = 0; v < graph.size(); ++v) {
    if (is_source[v]) {
      next.values[v] = 0;
      continue;
    }
    double best = kUnreached;
    for (Vertex u : graph.neighbors(v)) best = std::min(best, field.values[u] + 1);
    next.values[v] = best;
  }
  return next;
}

GradientRun gradient_run(GradientField field, const Graph& graph, int max_steps) {
  if (max_steps < 1) throw EvalError("gradient_run needs max_steps >= 1");
  GradientRun run;
  for (int i = 0; i < max_steps; ++i) {
    auto next = gradient_step(field, graph);
    if (next.values == field.values) {
      run.converged = true;
      break;
    }
    field = std::move(next);
    ++run.steps;
  }
  run.field = std::move(field);
  return run;
}

double max_epsilon(const Graph& graph) { return 1.0 / (1.0 + static_cast<double>(graph.max_degree())); }

ConsensusState consensus_step(const ConsensusState& cs, const Graph& graph) {
  if (cs.x.size() != graph.size()) throw EvalError("consensus state size does not match graph");
  const double limit = max_epsilon(graph);
  if (!(cs.epsilon > 0) || cs.epsilon > limit * (1 + 1e-12))
    throw EvalError("consensus epsilon " + std::to_string(cs.epsilon) + " outside (0, " + std::to_string(limit) + "]");
  ConsensusState next{std::vector<double>(cs.x.size()), cs.epsilon};
  for (Vertex v = 0; v < graph.size(); ++v) {
    const double xv = cs.x[v];
    double diff = 0, lo = xv, hi = xv;
    for (Vertex u : graph.neighbors(v)) {
      diff += cs.x[u] - xv;
      lo = std::min(lo, cs.x[u]);
      hi = std::max(hi, cs.x[u]);
    }
    // The exact update is a convex combination; rounding may overshoot by an ulp.
    next.x[v] = std::clamp(xv + cs.epsilon * diff, lo, hi);
  }
  return next;
}

Spread spread_of(const std::vector<double>& x) {
  Spread s;
  if (x.empty()) return s;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  s.range = *hi - *lo;
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double sq = 0;
  for (double v : x) sq += (v - s.mean) * (v - s.mean);
  s.variance = sq / static_cast<double>(x.size());
  return s;
}

Spread consensus_mobility_tick(World& world, const ConsensusMobilityParams& params) {
  ask(world, all_agents(world), [&](World& w, AgentId id) {
    random_walk_step(w, id, params.turn_bound, params.step);
  });
  const auto sensing = sensing_graph(world, params.radius);
  ConsensusState cs;
  cs.x.reserve(sensing.ids.size());
  for (AgentId id : sensing.ids) cs.x.push_back(world.agent(id).var("value"));
  cs.epsilon = max_epsilon(sensing.graph);
  cs = consensus_step(cs, sensing.graph);
  for (std::size_t i = 0; i < sensing.ids.size(); ++i) world.agent(sensing.ids[i]).set_var("value", cs.x[i]);
  return spread_of(cs.x);
}

}  // namespace sosim
