#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "sosim/error.hpp"
#include "sosim/world.hpp"

namespace sosim {

/// Snapshot of agent ids in id order. Membership is frozen at construction.
using AgentSet = std::vector<AgentId>;

/// Breed filter; std::nullopt addresses every live agent.
using BreedFilter = std::optional<std::string_view>;

using Predicate = std::function<bool(const Agent&)>;
using AgentKey = std::function<double(const Agent&)>;
using AgentAction = std::function<void(World&, AgentId)>;

/// Thrown by ask() when an action fails; names the agent whose turn it was.
class AskError : public EvalError {
 public:
  AskError(AgentId agent, const std::string& what)
      : EvalError("agent " + std::to_string(agent) + ": " + what), agent_(agent) {}
  AgentId agent() const { return agent_; }

 private:
  AgentId agent_;
};

AgentSet all_agents(const World& world, BreedFilter breed = std::nullopt);

AgentSet select_with(const World& world, BreedFilter breed, const Predicate& pred);

/// Agents at distance <= r from center (inclusive), id order.
AgentSet in_radius(const World& world, Vec2 center, double r, BreedFilter breed = std::nullopt);

/// Member with the smallest key, ties to the lowest id. Throws on an empty set.
AgentId min_one_of(const World& world, const AgentSet& set, const AgentKey& key);

AgentSet link_neighbors(const World& world, AgentId id);

/// Runs action once per member in an order drawn from world.rng(); members
/// that died before their turn are skipped, agents created meanwhile are not
/// visited.
void ask(World& world, const AgentSet& set, const AgentAction& action);

}  // namespace sosim
