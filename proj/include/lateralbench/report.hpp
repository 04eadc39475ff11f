#pragma once

#include <string>
#include <vector>

#include "lateralbench/metrics.hpp"
#include "lateralbench/sweep.hpp"

namespace lateral::report {

enum class DocFormat { text, json, csv };

// Renders a breakdown: aligned plain-text table (2-decimal display, exact
// counts alongside), JSON (full precision, round-trips to equal values) or
// a single-row CSV. Pure: identical input gives byte-identical output.
std::string render_breakdown(const metrics::ScoreBreakdown& breakdown,
                             DocFormat format);

// One CSV per breakdown cell plus the overall series:
// header "temperature,mean,stddev", full-precision values equal to
// curve_data output exactly.
std::string curve_csv(const sweep::SweepResult& result,
                      std::optional<metrics::CellId> cell);

// Self-contained SVG 1.1 line chart (800x500 viewBox, linear scales,
// 2-decimal tick labels, one polyline per cell series, no external assets,
// no timestamps).
std::string curves_svg(const sweep::SweepResult& result);

// Writes curve CSVs (one per cell + overall.csv) and curves.svg into
// out_dir; returns the paths written.
std::vector<std::string> render_curves(const sweep::SweepResult& result,
                                       const std::string& out_dir,
                                       bool with_svg = true);

// Rescores a persisted prediction log against a dataset file. Produces the
// same breakdown as the live run that wrote the log. Throws
// unknown_instance_id / duplicate_prediction.
metrics::ScoreBreakdown rescore_from_log(const std::string& prediction_log_path,
                                         const std::string& dataset_path);

}  // namespace lateral::report
