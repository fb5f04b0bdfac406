#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sosim/model.hpp"
#include "sosim/series.hpp"

namespace sosim {

/// Stop a run early once `reporter <op> value` holds after a tick.
struct StopRule {
  std::string reporter;
  std::string op = "<=";  // one of < <= > >= == !=
  double value = 0;

  bool holds(double sample) const;
};

struct SweepSpec {
  std::string model;
  WorldConfig world;
  nlohmann::json base_params = nlohmann::json::object();
  /// Parameter name -> values, enumerated as a cartesian product with the
  /// first entry varying slowest.
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> grid;
  int repetitions = 1;
  std::uint64_t base_seed = 0;
  std::int64_t max_ticks = 1000;
  std::optional<StopRule> stop;
  int parallelism = 1;
  bool write_series = false;

  static SweepSpec from_json(const nlohmann::json& doc);
  static SweepSpec load(const std::string& path);
  void validate() const;
  std::size_t point_count() const;
  std::size_t run_count() const { return point_count() * static_cast<std::size_t>(repetitions); }
  /// Grid values of run i (run i uses point i / repetitions).
  nlohmann::json point(std::size_t run_index) const;
  /// The config a single run executes with; world.seed = derive_seed(base_seed, i).
  RunConfig run_config(std::size_t run_index) const;
};

struct RunRecord {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  nlohmann::json params;  // grid values only
  std::int64_t ticks = 0;
  bool ok = false;
  std::string error;
  std::vector<std::string> metric_names;
  std::vector<double> metrics;  // final reporter values
  double wall_time = 0;         // seconds
  Series series;

  /// Equality ignoring wall_time.
  bool same_result(const RunRecord& other) const;
};

RunRecord run_single(const SweepSpec& spec, std::size_t run_index);

/// Runs every grid point x repetition. Failed runs are recorded, not thrown.
std::vector<RunRecord> run_experiment(const SweepSpec& spec);

struct SummaryRow {
  nlohmann::json group;  // param name -> value
  std::string metric;
  std::size_t n = 0;
  double mean = 0;
  double std = 0;  // n - 1 denominator; 0 when n == 1
  double min = 0;
  double max = 0;
  bool single = false;  // n == 1, std undefined
};

/// One row per (group, metric), groups sorted by parameter values, metrics
/// in reporter order. Failed runs are skipped. Throws on empty input.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records, const std::vector<std::string>& group_by);

std::string runs_csv(const SweepSpec& spec, const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<std::string>& group_by, const std::vector<SummaryRow>& rows);

/// Writes runs.csv, summary.csv and, when requested, series/run_<i>.csv.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepSpec& spec,
                         const std::vector<RunRecord>& records);

}  // namespace sosim
