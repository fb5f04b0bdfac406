#pragma once

#include <limits>
#include <vector>

#include "sosim/graph.hpp"
#include "sosim/world.hpp"

namespace sosim {

inline constexpr double kUnreached = std::numeric_limits<double>::infinity();

/// Hop-count distance estimates; sources hold 0.
struct GradientField {
  std::vector<double> values;
  std::vector<Vertex> sources;

  /// Sources at 0, everything else unreached.
  static GradientField fresh(std::size_t n, std::vector<Vertex> sources);
  /// Keeps stale values, moves the source set and pins the new sources to 0.
  void relocate_sources(std::vector<Vertex> new_sources);
};

/// Synchronous relaxation: sources -> 0, others -> min over neighbors + 1
/// (unreached without neighbors). Values may rise, which clears stale
/// estimates after sources move.
GradientField gradient_step(const GradientField& field, const Graph& graph);

struct GradientRun {
  GradientField field;
  int steps = 0;          // steps that changed at least one value
  bool converged = false; // a step produced no change within max_steps
};

GradientRun gradient_run(GradientField field, const Graph& graph, int max_steps);

struct ConsensusState {
  std::vector<double> x;
  double epsilon = 0;
};

/// Largest step weight that keeps the update doubly stochastic.
double max_epsilon(const Graph& graph);

/// x'(v) = x(v) + epsilon * sum over neighbors (x(u) - x(v)). Throws when
/// epsilon is outside (0, 1 / (1 + max degree)].
ConsensusState consensus_step(const ConsensusState& cs, const Graph& graph);

struct Spread {
  double range = 0;
  double variance = 0;  // population variance
  double mean = 0;
};

Spread spread_of(const std::vector<double>& x);

struct ConsensusMobilityParams {
  double radius = 2.0;
  double step = 0.1;
  double turn_bound = 45.0;
};

/// Every live agent random-walks, then one consensus step runs over the
/// proximity graph with epsilon = 1 / (1 + max degree), reading and writing
/// the agents' `value` variable.
Spread consensus_mobility_tick(World& world, const ConsensusMobilityParams& params);

}  // namespace sosim
