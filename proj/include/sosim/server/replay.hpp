#pragma once

#include <string>
#include <vector>

#include "sosim/server/protocol.hpp"
#include "sosim/series.hpp"

namespace sosim::server {

std::vector<json> parse_run_log(const std::string& text);
std::vector<json> load_run_log(const std::string& path);

/// Re-executes a recorded session without a server: steps the simulation
/// up to each record's tick, then applies it. Returns the reporter series
/// since the last setup, as a live session would export it.
Series replay(const std::vector<json>& log);

}  // namespace sosim::server
