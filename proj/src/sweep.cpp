#include "sosim/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include "sosim/error.hpp"
#include "sosim/rng.hpp"

namespace sosim {

using nlohmann::json;

bool StopRule::holds(double s) const {
  if (op == "<") return s < value;
  if (op == "<=") return s <= value;
  if (op == ">") return s > value;
  if (op == ">=") return s >= value;
  if (op == "==") return s == value;
  if (op == "!=") return s != value;
  throw ConfigError("unknown stop operator " + op);
}

SweepSpec SweepSpec::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("sweep spec must be a JSON object");
  SweepSpec s;
  try {
    s.model = doc.at("model").get<std::string>();
    s.world = world_config_from_json(doc.value("world", json(nullptr)));
    if (doc.contains("params")) s.base_params = doc["params"];
    for (const auto& [name, values] : doc.at("grid").items()) {
      if (!values.is_array()) throw ConfigError("grid." + name + " must be an array");
      s.grid.emplace_back(name, std::vector<json>(values.begin(), values.end()));
    }
    s.repetitions = doc.value("repetitions", 1);
    s.base_seed = doc.value("base_seed", std::uint64_t{0});
    s.max_ticks = doc.value("max_ticks", std::int64_t{1000});
    s.parallelism = doc.value("parallelism", 1);
    s.write_series = doc.value("series", false);
    if (doc.contains("stop") && !doc["stop"].is_null()) {
      const auto& st = doc["stop"];
      s.stop = StopRule{st.at("reporter").get<std::string>(), st.value("op", std::string("<=")),
                        st.at("value").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep spec: ") + e.what());
  }
  s.validate();
  return s;
}

SweepSpec SweepSpec::load(const std::string& path) {
  try {
    return from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void SweepSpec::validate() const {
  const auto& info = find_model(model);
  if (grid.empty()) throw ConfigError("sweep grid must not be empty");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (max_ticks < 0) throw ConfigError("max_ticks must be >= 0");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  ParamSet probe = info.default_params();
  probe.apply_json(base_params);
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw ConfigError("grid." + name + " has no values");
    for (const auto& v : values) probe.set_json(name, v);
  }
  if (stop) stop->holds(0);
}

std::size_t SweepSpec::point_count() const {
  std::size_t n = 1;
  for (const auto& [name, values] : grid) n *= values.size();
  return n;
}

json SweepSpec::point(std::size_t run_index) const {
  std::size_t p = run_index / static_cast<std::size_t>(repetitions);
  json out = json::object();
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    out[it->first] = it->second[p % it->second.size()];
    p /= it->second.size();
  }
  return out;
}

RunConfig SweepSpec::run_config(std::size_t run_index) const {
  RunConfig rc;
  rc.model = model;
  rc.world = world;
  rc.world.seed = derive_seed(base_seed, run_index);
  rc.params = base_params.is_object() ? base_params : json::object();
  const json values = point(run_index);
  for (const auto& [k, v] : values.items()) rc.params[k] = v;
  return rc;
}

bool RunRecord::same_result(const RunRecord& o) const {
  auto same_doubles = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a[i] == b[i] || (std::isnan(a[i]) && std::isnan(b[i])))) return false;
    return true;
  };
  return run_index == o.run_index && seed == o.seed && params == o.params && ticks == o.ticks && ok == o.ok &&
         error == o.error && metric_names == o.metric_names && same_doubles(metrics, o.metrics) &&
         series == o.series;
}

RunRecord run_single(const SweepSpec& spec, std::size_t run_index) {
  RunRecord rec;
  rec.run_index = run_index;
  rec.params = spec.point(run_index);
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto rc = spec.run_config(run_index);
    rec.seed = rc.world.seed;
    Simulation sim(rc);
    sim.setup();
    const auto& names = sim.world().series().names;
    rec.metric_names = names;
    std::optional<std::size_t> stop_col;
    if (spec.stop) {
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == spec.stop->reporter) stop_col = i;
      if (!stop_col) throw ConfigError("stop reporter " + spec.stop->reporter + " not registered by " + spec.model);
    }
    rec.metrics = sim.world().sample_reporters();
    bool stopped = stop_col && spec.stop->holds(rec.metrics[*stop_col]);
    while (!stopped && sim.world().tick() < spec.max_ticks && !sim.finished()) {
      rec.metrics = sim.step().counters;
      stopped = stop_col && spec.stop->holds(rec.metrics[*stop_col]);
    }
    rec.ticks = sim.world().tick();
    if (spec.write_series) rec.series = sim.world().series();
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<RunRecord> run_experiment(const SweepSpec& spec) {
  spec.validate();
  const std::size_t total = spec.run_count();
  std::vector<RunRecord> records(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) records[i] = run_single(spec, i);
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(spec.parallelism), total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records, const std::vector<std::string>& group_by) {
  if (records.empty()) throw EvalError("summarize: no records");
  struct Acc {
    std::vector<std::vector<double>> samples;
  };
  std::vector<std::string> metric_names;
  std::map<std::vector<json>, Acc> groups;
  for (const auto& r : records) {
    if (!r.ok) continue;
    if (metric_names.empty()) metric_names = r.metric_names;
    std::vector<json> key;
    for (const auto& g : group_by) {
      if (!r.params.contains(g)) throw EvalError("summarize: records have no parameter " + g);
      key.push_back(r.params[g]);
    }
    auto& acc = groups[key];
    acc.samples.resize(metric_names.size());
    for (std::size_t m = 0; m < metric_names.size() && m < r.metrics.size(); ++m) acc.samples[m].push_back(r.metrics[m]);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, acc] : groups) {
    json group = json::object();
    for (std::size_t i = 0; i < group_by.size(); ++i) group[group_by[i]] = key[i];
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      const auto& xs = acc.samples[m];
      if (xs.empty()) continue;
      SummaryRow row;
      row.group = group;
      row.metric = metric_names[m];
      row.n = xs.size();
      row.min = xs.front();
      row.max = xs.front();
      double total = 0;
      for (double x : xs) {
        total += x;
        row.min = std::min(row.min, x);
        row.max = std::max(row.max, x);
      }
      row.mean = total / static_cast<double>(row.n);
      if (row.n > 1) {
        double sq = 0;
        for (double x : xs) sq += (x - row.mean) * (x - row.mean);
        row.std = std::sqrt(sq / static_cast<double>(row.n - 1));
      } else {
        row.single = true;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {
std::string json_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_real(v.get<double>());
  return v.dump();
}
}  // namespace

std::string runs_csv(const SweepSpec& spec, const std::vector<RunRecord>& records) {
  std::vector<std::string> metric_names;
  for (const auto& r : records)
    if (r.ok) {
      metric_names = r.metric_names;
      break;
    }
  std::string out = "run_index,seed";
  for (const auto& [name, values] : spec.grid) out += "," + name;
  out += ",ticks,ok";
  for (const auto& m : metric_names) out += "," + m;
  out += ",wall_time\n";
  for (const auto& r : records) {
    out += std::to_string(r.run_index) + "," + std::to_string(r.seed);
    for (const auto& [name, values] : spec.grid) out += "," + json_cell(r.params.value(name, json(nullptr)));
    out += "," + std::to_string(r.ticks) + "," + (r.ok ? "1" : "0");
    for (std::size_t m = 0; m < metric_names.size(); ++m)
      out += "," + (r.ok && m < r.metrics.size() ? format_real(r.metrics[m]) : std::string());
    out += "," + format_real(r.wall_time) + "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<std::string>& group_by, const std::vector<SummaryRow>& rows) {
  std::string out;
  for (const auto& g : group_by) out += g + ",";
  out += "metric,n,mean,std,min,max\n";
  for (const auto& r : rows) {
    for (const auto& g : group_by) out += json_cell(r.group[g]) + ",";
    out += r.metric + "," + std::to_string(r.n) + "," + format_real(r.mean) + "," + format_real(r.std) + "," +
           format_real(r.min) + "," + format_real(r.max) + "\n";
  }
  return out;
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepSpec& spec,
                         const std::vector<RunRecord>& records) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "runs.csv", runs_csv(spec, records));
  std::vector<std::string> group_by;
  for (const auto& [name, values] : spec.grid) group_by.push_back(name);
  bool any_ok = false;
  for (const auto& r : records) any_ok = any_ok || r.ok;
  if (any_ok) write_text_file(dir / "summary.csv", summary_csv(group_by, summarize(records, group_by)));
  if (spec.write_series) {
    std::filesystem::create_directories(dir / "series", ec);
    if (ec) throw IoError("cannot create " + (dir / "series").string() + ": " + ec.message());
    for (const auto& r : records)
      if (r.ok) export_csv(r.series, dir / "series" / ("run_" + std::to_string(r.run_index) + ".csv"));
  }
}

}  // namespace sosim
