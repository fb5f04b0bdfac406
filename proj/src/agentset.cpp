#include "sosim/agentset.hpp"

#include <span>

namespace sosim {

namespace {
bool breed_matches(const Agent& a, BreedFilter breed) { return !breed || a.breed == *breed; }
}  // namespace

AgentSet all_agents(const World& world, BreedFilter breed) {
  AgentSet out;
  for (const auto& a : world.agents())
    if (a.alive && breed_matches(a, breed)) out.push_back(a.id);
  return out;
}

AgentSet select_with(const World& world, BreedFilter breed, const Predicate& pred) {
  AgentSet out;
  for (const auto& a : world.agents())
    if (a.alive && breed_matches(a, breed) && pred(a)) out.push_back(a.id);
  return out;
}

AgentSet in_radius(const World& world, Vec2 center, double r, BreedFilter breed) {
  if (r < 0) throw EvalError("in-radius: radius must be non-negative");
  AgentSet out;
  for (const auto& a : world.agents())
    if (a.alive && breed_matches(a, breed) && world.distance(center, a.pos) <= r) out.push_back(a.id);
  return out;
}

AgentId min_one_of(const World& world, const AgentSet& set, const AgentKey& key) {
  if (set.empty()) throw EvalError("min-one-of: empty agentset");
  AgentId best = set.front();
  double best_key = key(world.agent(best));
  for (std::size_t i = 1; i < set.size(); ++i) {
    const double k = key(world.agent(set[i]));
    if (k < best_key || (k == best_key && set[i] < best)) {
      best = set[i];
      best_key = k;
    }
  }
  return best;
}

AgentSet link_neighbors(const World& world, AgentId id) {
  auto span = world.link_neighbors(id);
  return AgentSet(span.begin(), span.end());
}

void ask(World& world, const AgentSet& set, const AgentAction& action) {
  AgentSet order = set;
  world.rng().shuffle(std::span<AgentId>(order));
  for (AgentId id : order) {
    if (!world.alive(id)) continue;
    try {
      action(world, id);
    } catch (const AskError&) {
      throw;
    } catch (const std::exception& e) {
      throw AskError(id, e.what());
    }
  }
}

}  // namespace sosim
