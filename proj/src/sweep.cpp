#include "lateralbench/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "lateralbench/io.hpp"

namespace lateral::sweep {

namespace fs = std::filesystem;
using nlohmann::json;

void SweepPlan::check() const {
  if (temperatures.empty()) {
    throw Error(errc::bad_config, "sweep needs at least one temperature");
  }
  for (size_t i = 0; i < temperatures.size(); ++i) {
    if (temperatures[i] < 0.0) {
      throw Error(errc::bad_config, "temperatures must be >= 0");
    }
    if (i > 0 && temperatures[i] <= temperatures[i - 1]) {
      throw Error(errc::bad_config, "temperatures must be strictly increasing");
    }
  }
  if (repeats_per_temperature < 1) {
    throw Error(errc::bad_config, "repeats_per_temperature must be >= 1");
  }
  if (state_dir.empty()) {
    throw Error(errc::bad_config, "sweep needs a state directory");
  }
  solver.check();
}

std::vector<double> temperature_grid(double start, double stop, double step) {
  if (step <= 0.0 || stop < start) {
    throw Error(errc::bad_config, "bad temperature grid");
  }
  // Micro-unit integer arithmetic keeps grid values exact (0.6, not
  // 0.6000000000000001) and the cell filenames clean.
  const long long s = std::llround(start * 1e6);
  const long long e = std::llround(stop * 1e6);
  const long long d = std::llround(step * 1e6);
  std::vector<double> grid;
  for (long long t = s; t <= e; t += d) {
    grid.push_back(static_cast<double>(t) / 1e6);
  }
  return grid;
}

std::vector<double> default_temperature_grid() {
  return temperature_grid(0.0, 1.2, 0.2);
}

std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", t);
  std::string s(buf);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

bool SweepResult::complete() const {
  return cells.size() ==
         plan.temperatures.size() *
             static_cast<size_t>(plan.repeats_per_temperature);
}

std::vector<const SweepCell*> SweepResult::cells_at(double temperature) const {
  std::vector<const SweepCell*> out;
  for (const auto& cell : cells) {
    if (cell.temperature == temperature) out.push_back(&cell);
  }
  return out;
}

std::string dataset_hash(const std::vector<PuzzleInstance>& instances) {
  const std::string text = serialize_dataset(instances);
  uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string plan_hash(const SweepPlan& plan, const std::string& dataset_hash) {
  std::string text = dataset_hash;
  for (double t : plan.temperatures) {
    text += "|";
    text += format_temperature(t);
  }
  text += "|r" + std::to_string(plan.repeats_per_temperature);
  text += "|s" + std::to_string(plan.seed);
  text += "|" + plan.solver.solver_id + "|" + plan.solver.model_name;
  text += "|b" + std::to_string(plan.solver.retry_budget);
  text += "|m" + std::to_string(plan.solver.max_tokens);
  text += "|h" + plan.solver.prompt.choices_header;
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string cell_filename(double temperature, int repeat) {
  return format_temperature(temperature) + "_" + std::to_string(repeat) +
         ".json";
}

std::string manifest_path(const SweepPlan& plan) {
  return (fs::path(plan.state_dir) / "manifest.json").string();
}

void check_or_write_manifest(const SweepPlan& plan, const std::string& dhash,
                             const std::string& phash) {
  const std::string path = manifest_path(plan);
  if (fs::exists(path)) {
    json doc;
    try {
      doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
      throw Error(errc::plan_mismatch,
                  path + " is unreadable: " + std::string(e.what()));
    }
    const std::string existing = doc.value("plan_hash", "");
    if (existing != phash) {
      throw Error(errc::plan_mismatch,
                  "state directory " + plan.state_dir +
                      " belongs to a different plan (manifest hash " + existing +
                      ", this plan " + phash + ")");
    }
    return;
  }
  json doc;
  doc["plan_hash"] = phash;
  doc["dataset_hash"] = dhash;
  json temps = json::array();
  for (double t : plan.temperatures) temps.push_back(t);
  doc["temperatures"] = std::move(temps);
  doc["repeats_per_temperature"] = plan.repeats_per_temperature;
  doc["solver_id"] = plan.solver.solver_id;
  doc["model_name"] = plan.solver.model_name;
  doc["seed"] = plan.seed;
  doc["created_at"] = iso_timestamp();
  write_file(path, doc.dump(2) + "\n");
}

std::optional<SweepCell> try_load_cell(const std::string& path,
                                       const std::string& phash) {
  if (!fs::exists(path)) return std::nullopt;
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error&) {
    return std::nullopt;  // half-written cell: redo it
  }
  if (doc.value("plan_hash", "") != phash) {
    throw Error(errc::plan_mismatch,
                path + " was produced by a different plan");
  }
  SweepCell cell;
  cell.temperature = doc.at("temperature").get<double>();
  cell.repeat = doc.at("repeat").get<int>();
  cell.breakdown = metrics::breakdown_from_json(doc.at("breakdown"));
  return cell;
}

void write_cell(const SweepPlan& plan, const std::string& phash,
                const SweepCell& cell) {
  json doc;
  doc["plan_hash"] = phash;
  doc["temperature"] = cell.temperature;
  doc["repeat"] = cell.repeat;
  doc["breakdown"] = metrics::breakdown_to_json(cell.breakdown);
  const auto path =
      fs::path(plan.state_dir) / cell_filename(cell.temperature, cell.repeat);
  write_file(path.string(), doc.dump(2) + "\n");
}

}  // namespace

SweepResult run_sweep(const SweepPlan& plan, llm::ChatClient& client,
                      const std::vector<PuzzleInstance>& instances) {
  plan.check();
  ensure_dir(plan.state_dir);
  const std::string dhash = dataset_hash(instances);
  const std::string phash = plan_hash(plan, dhash);
  check_or_write_manifest(plan, dhash, phash);

  SweepResult result;
  result.plan = plan;
  result.dataset_hash = dhash;
  result.started_at = iso_timestamp();

  // Repeats run to completion per temperature before advancing, so an
  // interrupted sweep still yields whole points.
  for (double temperature : plan.temperatures) {
    for (int repeat = 0; repeat < plan.repeats_per_temperature; ++repeat) {
      const auto path =
          fs::path(plan.state_dir) / cell_filename(temperature, repeat);
      if (auto cached = try_load_cell(path.string(), phash)) {
        result.cells.push_back(std::move(*cached));  // resume: no re-issue
        continue;
      }
      llm::SolverOptions options = plan.solver;
      options.temperature = temperature;
      const auto predictions = llm::solve_dataset(client, instances, options);
      SweepCell cell;
      cell.temperature = temperature;
      cell.repeat = repeat;
      cell.breakdown = metrics::score_breakdown(predictions, instances);
      write_cell(plan, phash, cell);  // flushed before the next cell starts
      result.cells.push_back(std::move(cell));
    }
  }
  result.finished_at = iso_timestamp();
  return result;
}

SweepResult load_sweep_state(const SweepPlan& plan) {
  plan.check();
  SweepResult result;
  result.plan = plan;
  for (double temperature : plan.temperatures) {
    for (int repeat = 0; repeat < plan.repeats_per_temperature; ++repeat) {
      const auto path =
          fs::path(plan.state_dir) / cell_filename(temperature, repeat);
      if (!fs::exists(path.string())) continue;
      json doc = json::parse(read_file(path.string()));
      SweepCell cell;
      cell.temperature = doc.at("temperature").get<double>();
      cell.repeat = doc.at("repeat").get<int>();
      cell.breakdown = metrics::breakdown_from_json(doc.at("breakdown"));
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

std::vector<CurvePoint> curve_data(const SweepResult& result,
                                   std::optional<metrics::CellId> cell) {
  const std::string label =
      cell ? std::string(metrics::cell_name(*cell)) : std::string("overall");
  std::vector<CurvePoint> points;
  for (double temperature : result.plan.temperatures) {
    const auto repeats = result.cells_at(temperature);
    if (static_cast<int>(repeats.size()) != result.plan.repeats_per_temperature) {
      throw Error(errc::incomplete_sweep,
                  "temperature " + format_temperature(temperature) + " has " +
                      std::to_string(repeats.size()) + "/" +
                      std::to_string(result.plan.repeats_per_temperature) +
                      " repeats");
    }
    std::vector<double> values;
    for (const SweepCell* c : repeats) {
      const auto v = cell ? c->breakdown.cell(*cell).value()
                          : c->breakdown.overall();
      if (!v) {
        throw Error(errc::incomplete_sweep,
                    label + " is undefined at temperature " +
                        format_temperature(temperature));
      }
      values.push_back(*v);
    }
    CurvePoint point;
    point.temperature = temperature;
    double sum = 0.0;
    for (double v : values) sum += v;
    point.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - point.mean) * (v - point.mean);
      point.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    points.push_back(point);
  }
  return points;
}

}  // namespace lateral::sweep
