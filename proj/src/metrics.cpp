#include "lateralbench/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace lateral::metrics {

std::string_view cell_name(CellId id) {
  switch (id) {
    case CellId::inst_or: return "inst_or";
    case CellId::inst_sr: return "inst_sr";
    case CellId::inst_cr: return "inst_cr";
    case CellId::group_pair: return "group_pair";
    case CellId::group_triple: return "group_triple";
  }
  return "?";
}

std::optional<CellId> cell_from_name(std::string_view name) {
  for (CellId id : all_cells()) {
    if (cell_name(id) == name) return id;
  }
  return std::nullopt;
}

const std::vector<CellId>& all_cells() {
  static const std::vector<CellId> cells = {
      CellId::inst_or, CellId::inst_sr, CellId::inst_cr,
      CellId::group_pair, CellId::group_triple};
  return cells;
}

const Cell& ScoreBreakdown::cell(CellId id) const {
  switch (id) {
    case CellId::inst_or: return inst_or;
    case CellId::inst_sr: return inst_sr;
    case CellId::inst_cr: return inst_cr;
    case CellId::group_pair: return group_pair;
    case CellId::group_triple: return group_triple;
  }
  return inst_or;
}

std::optional<double> ScoreBreakdown::overall() const {
  // Undefined cells (empty denominators) are excluded from the mean, not
  // treated as 0.
  double sum = 0.0;
  int defined = 0;
  for (CellId id : overall_cells) {
    if (auto v = cell(id).value()) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / defined;
}

PredictionMap index_predictions(const std::vector<PredictionRecord>& predictions,
                                const std::vector<PuzzleInstance>& instances) {
  std::unordered_map<std::string, const PuzzleInstance*> known;
  known.reserve(instances.size());
  for (const auto& inst : instances) known.emplace(inst.id, &inst);

  PredictionMap map;
  map.reserve(predictions.size());
  for (const auto& pred : predictions) {
    auto it = known.find(pred.instance_id);
    if (it == known.end()) {
      throw Error(errc::unknown_instance_id,
                  "prediction for \"" + pred.instance_id +
                      "\" has no matching instance");
    }
    if (!map.emplace(pred.instance_id, &pred).second) {
      throw Error(errc::duplicate_prediction,
                  "two predictions for instance \"" + pred.instance_id + "\"");
    }
    if (pred.predicted_index &&
        (*pred.predicted_index < 0 ||
         *pred.predicted_index >=
             static_cast<int>(it->second->choices.size()))) {
      throw Error(errc::label_out_of_range,
                  "prediction for \"" + pred.instance_id + "\" names choice " +
                      std::to_string(*pred.predicted_index) + " of " +
                      std::to_string(it->second->choices.size()));
    }
  }
  return map;
}

bool is_correct(const PredictionRecord* rec, const PuzzleInstance& inst) {
  // Missing prediction and ABSTAIN both score as incorrect.
  return rec != nullptr && rec->predicted_index &&
         *rec->predicted_index == inst.gold_index;
}

namespace {

const PredictionRecord* find(const PredictionMap& map, const std::string& id) {
  auto it = map.find(id);
  return it == map.end() ? nullptr : it->second;
}

Cell count_instances(const PredictionMap& map,
                     const std::vector<PuzzleInstance>& instances,
                     std::optional<Variant> variant_filter) {
  Cell cell;
  for (const auto& inst : instances) {
    if (variant_filter && inst.variant != *variant_filter) continue;
    ++cell.total;
    if (is_correct(find(map, inst.id), inst)) ++cell.correct;
  }
  return cell;
}

Cell count_groups(const PredictionMap& map,
                  const std::vector<AdversarialGroup>& groups,
                  const std::set<Variant>& required) {
  Cell cell;
  for (const auto& group : groups) {
    const bool eligible =
        std::all_of(required.begin(), required.end(),
                    [&](Variant v) { return group.has(v); });
    if (!eligible) continue;
    ++cell.total;
    const bool all_correct = std::all_of(
        required.begin(), required.end(), [&](Variant v) {
          const auto& member = group.members.at(v);
          return is_correct(find(map, member.id), member);
        });
    if (all_correct) ++cell.correct;
  }
  return cell;
}

}  // namespace

std::optional<double> instance_accuracy(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<PuzzleInstance>& instances,
    std::optional<Variant> variant_filter) {
  const auto map = index_predictions(predictions, instances);
  return count_instances(map, instances, variant_filter).value();
}

std::optional<double> group_accuracy(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<AdversarialGroup>& groups,
    const std::set<Variant>& required_variants) {
  std::vector<PuzzleInstance> members;
  for (const auto& group : groups) {
    for (const auto& [variant, inst] : group.members) members.push_back(inst);
  }
  const auto map = index_predictions(predictions, members);
  return count_groups(map, groups, required_variants).value();
}

ScoreBreakdown score_breakdown(const std::vector<PredictionRecord>& predictions,
                               const std::vector<PuzzleInstance>& instances,
                               const std::vector<CellId>& overall_cells) {
  const auto map = index_predictions(predictions, instances);
  const auto groups = group_instances(instances);

  ScoreBreakdown b;
  b.overall_cells = overall_cells;
  b.inst_or = count_instances(map, instances, Variant::OR);
  b.inst_sr = count_instances(map, instances, Variant::SR);
  b.inst_cr = count_instances(map, instances, Variant::CR);
  b.group_pair = count_groups(map, groups, {Variant::OR, Variant::SR});
  b.group_triple = count_groups(map, groups, {Variant::OR, Variant::SR, Variant::CR});
  return b;
}

nlohmann::json breakdown_to_json(const ScoreBreakdown& breakdown) {
  nlohmann::json cells = nlohmann::json::object();
  for (CellId id : all_cells()) {
    const Cell& c = breakdown.cell(id);
    nlohmann::json entry;
    entry["correct"] = c.correct;
    entry["total"] = c.total;
    if (auto v = c.value()) {
      entry["value"] = *v;
    } else {
      entry["value"] = nullptr;
    }
    cells[std::string(cell_name(id))] = std::move(entry);
  }
  nlohmann::json doc;
  doc["cells"] = std::move(cells);
  nlohmann::json selected = nlohmann::json::array();
  for (CellId id : breakdown.overall_cells) {
    selected.push_back(std::string(cell_name(id)));
  }
  doc["overall_cells"] = std::move(selected);
  if (auto v = breakdown.overall()) {
    doc["overall"] = *v;
  } else {
    doc["overall"] = nullptr;
  }
  return doc;
}

ScoreBreakdown breakdown_from_json(const nlohmann::json& doc) {
  ScoreBreakdown b;
  auto read_cell = [&](CellId id) {
    const auto& entry = doc.at("cells").at(std::string(cell_name(id)));
    Cell c;
    c.correct = entry.at("correct").get<long>();
    c.total = entry.at("total").get<long>();
    return c;
  };
  b.inst_or = read_cell(CellId::inst_or);
  b.inst_sr = read_cell(CellId::inst_sr);
  b.inst_cr = read_cell(CellId::inst_cr);
  b.group_pair = read_cell(CellId::group_pair);
  b.group_triple = read_cell(CellId::group_triple);
  if (doc.contains("overall_cells")) {
    b.overall_cells.clear();
    for (const auto& name : doc.at("overall_cells")) {
      if (auto id = cell_from_name(name.get<std::string>())) {
        b.overall_cells.push_back(*id);
      }
    }
  }
  return b;
}

std::string breakdown_to_text(const ScoreBreakdown& breakdown) {
  std::ostringstream out;
  char line[128];
  out << "cell          score  correct/total\n";
  for (CellId id : all_cells()) {
    const Cell& c = breakdown.cell(id);
    if (auto v = c.value()) {
      std::snprintf(line, sizeof(line), "%-12s  %5.2f  %ld/%ld\n",
                    std::string(cell_name(id)).c_str(), *v, c.correct, c.total);
    } else {
      std::snprintf(line, sizeof(line), "%-12s    n/a  0/0\n",
                    std::string(cell_name(id)).c_str());
    }
    out << line;
  }
  if (auto v = breakdown.overall()) {
    std::snprintf(line, sizeof(line), "%-12s  %5.2f\n", "overall", *v);
  } else {
    std::snprintf(line, sizeof(line), "%-12s    n/a\n", "overall");
  }
  out << line;
  return out.str();
}

}  // namespace lateral::metrics
