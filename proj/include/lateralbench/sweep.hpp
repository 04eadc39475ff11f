#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lateralbench/llm/solver.hpp"
#include "lateralbench/metrics.hpp"

namespace lateral::sweep {

// The temperature-sweep experiment: for each temperature, several full-
// dataset solves, each scored into a breakdown.
struct SweepPlan {
  std::vector<double> temperatures;  // strictly increasing, each >= 0
  int repeats_per_temperature = 3;
  std::string state_dir;             // one JSON file per completed cell
  llm::SolverOptions solver;
  uint64_t seed = 0;

  void check() const;  // throws bad_config
};

// Default grid 0.0 .. 1.2 inclusive, step 0.2 (7 points). Built in decimal
// fixed-point so grid values are exact and filenames stay clean.
std::vector<double> default_temperature_grid();
std::vector<double> temperature_grid(double start, double stop, double step);

// Stable short form used in cell filenames ({temp}_{repeat}.json).
std::string format_temperature(double t);

struct SweepCell {
  double temperature = 0.0;
  int repeat = 0;
  metrics::ScoreBreakdown breakdown;
};

struct SweepResult {
  SweepPlan plan;
  std::vector<SweepCell> cells;  // ordered by (temperature index, repeat)
  std::string dataset_hash;
  std::string started_at;   // ISO-8601, provenance only
  std::string finished_at;

  bool complete() const;
  std::vector<const SweepCell*> cells_at(double temperature) const;
};

struct CurvePoint {
  double temperature = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev over repeats; 0 when repeats == 1
};

// Per-temperature mean/stddev of one breakdown cell, ordered by temperature.
// cell = nullopt selects the overall score. Throws incomplete_sweep when a
// (temperature, repeat) slot is missing or any selected value is undefined.
std::vector<CurvePoint> curve_data(const SweepResult& result,
                                   std::optional<metrics::CellId> cell);

// Runs the sweep, persisting each completed (temperature, repeat) cell under
// plan.state_dir before moving on. Already-persisted cells are skipped on
// restart; a manifest with the plan hash guards against resuming a different
// plan (throws plan_mismatch). Solver aborts propagate after flushing
// partial results.
SweepResult run_sweep(const SweepPlan& plan, llm::ChatClient& client,
                      const std::vector<PuzzleInstance>& instances);

// Assembles a result from whatever cells a state directory holds.
SweepResult load_sweep_state(const SweepPlan& plan);

// FNV-1a 64 over the canonical dataset serialization; provenance only.
std::string dataset_hash(const std::vector<PuzzleInstance>& instances);
std::string plan_hash(const SweepPlan& plan, const std::string& dataset_hash);

}  // namespace lateral::sweep
