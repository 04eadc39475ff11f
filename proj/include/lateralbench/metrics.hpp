#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lateralbench/dataset.hpp"

namespace lateral::metrics {

// One accuracy cell: exact integer counts plus the single final division.
// value is nullopt when the denominator is zero (undefined, not 0.0).
struct Cell {
  long correct = 0;
  long total = 0;

  std::optional<double> value() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
  }
};

// Which cells feed the overall mean. Default is the leaderboard-style set:
// three instance accuracies plus the two group accuracies.
enum class CellId { inst_or, inst_sr, inst_cr, group_pair, group_triple };

std::string_view cell_name(CellId id);
std::optional<CellId> cell_from_name(std::string_view name);
const std::vector<CellId>& all_cells();

struct ScoreBreakdown {
  Cell inst_or;
  Cell inst_sr;
  Cell inst_cr;
  Cell group_pair;    // OR+SR both correct, over groups having both
  Cell group_triple;  // OR+SR+CR all correct, over complete groups
  std::vector<CellId> overall_cells = all_cells();

  const Cell& cell(CellId id) const;
  // Arithmetic mean of the selected cells, skipping undefined ones.
  std::optional<double> overall() const;
};

// predictions keyed by instance id; rejects duplicates and ids that are not
// in the dataset.
using PredictionMap = std::unordered_map<std::string, const PredictionRecord*>;
PredictionMap index_predictions(const std::vector<PredictionRecord>& predictions,
                                const std::vector<PuzzleInstance>& instances);

bool is_correct(const PredictionRecord* rec, const PuzzleInstance& inst);

// Fraction of (optionally variant-filtered) instances answered correctly.
// A missing prediction or an ABSTAIN counts as incorrect. Returns nullopt
// when the filter matches zero instances. Throws unknown_instance_id /
// duplicate_prediction.
std::optional<double> instance_accuracy(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<PuzzleInstance>& instances,
    std::optional<Variant> variant_filter = std::nullopt);

// Fraction of eligible groups whose every required-variant member is
// correct. Groups lacking a required variant are excluded from the
// denominator.
std::optional<double> group_accuracy(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<AdversarialGroup>& groups,
    const std::set<Variant>& required_variants);

// Full per-variant and group breakdown over the dataset.
ScoreBreakdown score_breakdown(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<PuzzleInstance>& instances,
    const std::vector<CellId>& overall_cells = all_cells());

// JSON emission carries the exact integer counts, so values round-trip
// without floating drift. to_text is the aligned 2-decimal table.
nlohmann::json breakdown_to_json(const ScoreBreakdown& breakdown);
ScoreBreakdown breakdown_from_json(const nlohmann::json& doc);
std::string breakdown_to_text(const ScoreBreakdown& breakdown);

}  // namespace lateral::metrics
