#include "lateralbench/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lateralbench/io.hpp"

namespace lateral {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::OR: return "OR";
    case Variant::SR: return "SR";
    case Variant::CR: return "CR";
  }
  return "?";
}

std::string_view subtask_name(Subtask s) {
  return s == Subtask::sentence ? "sentence" : "word";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  if (name == "OR") return Variant::OR;
  if (name == "SR") return Variant::SR;
  if (name == "CR") return Variant::CR;
  return std::nullopt;
}

std::optional<Subtask> subtask_from_name(std::string_view name) {
  if (name == "sentence") return Subtask::sentence;
  if (name == "word") return Subtask::word;
  return std::nullopt;
}

namespace {

std::string record_label(const json& rec, size_t index) {
  if (rec.is_object() && rec.contains("id") && rec.at("id").is_string()) {
    return "record \"" + rec.at("id").get<std::string>() + "\"";
  }
  return "record #" + std::to_string(index);
}

PuzzleInstance instance_from_json(const json& rec, size_t index,
                                  const std::string& origin) {
  const std::string label = record_label(rec, index) + " in " + origin;
  if (!rec.is_object()) {
    throw Error(errc::malformed_file, label + ": record is not an object");
  }
  auto require = [&](const char* field) -> const json& {
    if (!rec.contains(field)) {
      throw Error(errc::malformed_file,
                  label + ": missing field \"" + field + "\"");
    }
    return rec.at(field);
  };

  PuzzleInstance inst;
  try {
    inst.id = require("id").get<std::string>();
    inst.group_id = require("group_id").get<std::string>();
    const auto variant_str = require("variant").get<std::string>();
    const auto variant = variant_from_name(variant_str);
    if (!variant) {
      throw Error(errc::malformed_file,
                  label + ": unknown variant \"" + variant_str + "\"");
    }
    inst.variant = *variant;
    const auto subtask_str = require("subtask").get<std::string>();
    const auto subtask = subtask_from_name(subtask_str);
    if (!subtask) {
      throw Error(errc::malformed_file,
                  label + ": unknown subtask \"" + subtask_str + "\"");
    }
    inst.subtask = *subtask;
    inst.question = require("question").get<std::string>();
    inst.choices = require("choices").get<std::vector<std::string>>();
    const json& gold = require("gold_index");
    if (!gold.is_number_integer()) {
      throw Error(errc::malformed_file, label + ": gold_index is not an integer");
    }
    inst.gold_index = gold.get<int>();
  } catch (const json::exception& e) {
    throw Error(errc::malformed_file, label + ": " + e.what());
  }

  return inst;
}

ordered_json instance_to_json(const PuzzleInstance& inst) {
  ordered_json rec;
  rec["id"] = inst.id;
  rec["group_id"] = inst.group_id;
  rec["variant"] = std::string(variant_name(inst.variant));
  rec["subtask"] = std::string(subtask_name(inst.subtask));
  rec["question"] = inst.question;
  rec["choices"] = inst.choices;
  rec["gold_index"] = inst.gold_index;
  return rec;
}

}  // namespace

std::vector<PuzzleInstance> parse_dataset_lenient(const std::string& json_text,
                                                  const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based byte offset of the parse failure.
    throw Error(errc::malformed_file,
                origin + ": invalid JSON at byte " + std::to_string(e.byte) +
                    " (" + e.what() + ")");
  }
  if (!doc.is_array()) {
    throw Error(errc::malformed_file, origin + ": top level is not a JSON array");
  }
  std::vector<PuzzleInstance> instances;
  instances.reserve(doc.size());
  for (size_t i = 0; i < doc.size(); ++i) {
    instances.push_back(instance_from_json(doc[i], i, origin));
  }
  return instances;
}

std::vector<PuzzleInstance> parse_dataset(const std::string& json_text,
                                          const std::string& origin) {
  std::vector<PuzzleInstance> instances = parse_dataset_lenient(json_text, origin);
  std::unordered_set<std::string> seen_ids;
  std::set<std::pair<std::string, Variant>> seen_group_variants;
  for (const auto& inst : instances) {
    if (inst.choices.size() < 2) {
      throw Error(errc::malformed_file,
                  "record \"" + inst.id + "\" in " + origin +
                      ": needs at least 2 choices, got " +
                      std::to_string(inst.choices.size()));
    }
    if (inst.gold_index < 0 ||
        inst.gold_index >= static_cast<int>(inst.choices.size())) {
      throw Error(errc::label_out_of_range,
                  "record \"" + inst.id + "\" in " + origin + ": gold_index " +
                      std::to_string(inst.gold_index) + " outside [0, " +
                      std::to_string(inst.choices.size()) + ")");
    }
    if (!seen_ids.insert(inst.id).second) {
      throw Error(errc::duplicate_id,
                  "record \"" + inst.id + "\" in " + origin + " appears twice");
    }
    if (!seen_group_variants.insert({inst.group_id, inst.variant}).second) {
      throw Error(errc::duplicate_variant,
                  "record \"" + inst.id + "\" in " + origin + ": group \"" +
                      inst.group_id + "\" already has a " +
                      std::string(variant_name(inst.variant)) + " member");
    }
  }
  return instances;
}

std::vector<PuzzleInstance> load_dataset(const std::string& path) {
  return parse_dataset(read_file(path), path);
}

std::vector<PuzzleInstance> load_dataset_lenient(const std::string& path) {
  return parse_dataset_lenient(read_file(path), path);
}

std::string serialize_dataset(const std::vector<PuzzleInstance>& instances) {
  ordered_json arr = ordered_json::array();
  for (const auto& inst : instances) arr.push_back(instance_to_json(inst));
  return arr.dump(2) + "\n";
}

void save_dataset(const std::vector<PuzzleInstance>& instances,
                  const std::string& path) {
  write_file(path, serialize_dataset(instances));
}

std::vector<AdversarialGroup> group_instances(
    const std::vector<PuzzleInstance>& instances) {
  std::map<std::string, AdversarialGroup> by_id;
  for (const auto& inst : instances) {
    auto& group = by_id[inst.group_id];
    group.group_id = inst.group_id;
    if (!group.members.emplace(inst.variant, inst).second) {
      throw Error(errc::duplicate_variant,
                  "group \"" + inst.group_id + "\" has two " +
                      std::string(variant_name(inst.variant)) + " members");
    }
  }
  std::vector<AdversarialGroup> groups;
  groups.reserve(by_id.size());
  for (auto& [group_id, group] : by_id) {
    if (!group.has(Variant::OR)) {
      throw Error(errc::missing_original,
                  "group \"" + group_id + "\" has no OR member");
    }
    groups.push_back(std::move(group));
  }
  return groups;  // std::map iteration is already sorted by group_id
}

bool ValidationReport::has_errors() const {
  return std::any_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
    return i.severity == Severity::error;
  });
}

std::string ValidationReport::to_text() const {
  if (issues.empty()) return "ok: no issues found\n";
  std::ostringstream out;
  for (const auto& issue : issues) {
    out << (issue.severity == Severity::error ? "ERROR" : "WARNING") << " ["
        << issue.code << "] " << issue.subject << ": " << issue.message << "\n";
  }
  return out.str();
}

ValidationReport validate(const std::vector<PuzzleInstance>& instances) {
  ValidationReport report;
  auto add = [&](Severity sev, std::string code, std::string subject,
                 std::string message) {
    report.issues.push_back(
        {sev, std::move(code), std::move(subject), std::move(message)});
  };

  std::unordered_set<std::string> seen_ids;
  std::set<std::pair<std::string, Variant>> seen_group_variants;
  for (const auto& inst : instances) {
    if (inst.choices.size() < 2) {
      add(Severity::error, "choices_lt_2", inst.id,
          "has " + std::to_string(inst.choices.size()) +
              " choices, at least 2 required");
    }
    if (inst.gold_index < 0 ||
        inst.gold_index >= static_cast<int>(inst.choices.size())) {
      add(Severity::error, "gold_out_of_range", inst.id,
          "gold_index " + std::to_string(inst.gold_index) + " outside [0, " +
              std::to_string(inst.choices.size()) + ")");
    }
    if (!seen_ids.insert(inst.id).second) {
      add(Severity::error, "duplicate_id", inst.id, "id appears twice");
    }
    if (!seen_group_variants.insert({inst.group_id, inst.variant}).second) {
      add(Severity::error, "duplicate_variant", inst.group_id,
          "two " + std::string(variant_name(inst.variant)) + " members");
    }
    if (inst.question.empty()) {
      add(Severity::warning, "empty_question", inst.id, "question text is empty");
    }
    for (size_t c = 0; c < inst.choices.size(); ++c) {
      if (inst.choices[c].empty()) {
        add(Severity::warning, "empty_choice", inst.id,
            "choice " + std::to_string(c) + " is empty");
      }
    }
  }

  // Grouping checks, ordered by group_id for a deterministic report.
  std::map<std::string, std::set<Variant>> group_variants;
  for (const auto& inst : instances) {
    group_variants[inst.group_id].insert(inst.variant);
  }
  for (const auto& [group_id, variants] : group_variants) {
    if (!variants.count(Variant::OR)) {
      add(Severity::error, "missing_original", group_id, "group has no OR member");
    }
    for (Variant v : {Variant::SR, Variant::CR}) {
      if (!variants.count(v)) {
        add(Severity::warning, "incomplete_group", group_id,
            "group has no " + std::string(variant_name(v)) +
                " member; group metrics use present members only");
      }
    }
  }
  return report;
}

std::string serialize_prediction(const PredictionRecord& record) {
  ordered_json rec;
  rec["instance_id"] = record.instance_id;
  if (record.predicted_index) {
    rec["predicted_index"] = *record.predicted_index;
  } else {
    rec["predicted_index"] = nullptr;  // ABSTAIN
  }
  rec["solver_id"] = record.solver_id;
  if (record.temperature) rec["temperature"] = *record.temperature;
  rec["raw_response"] = record.raw_response;
  rec["attempts"] = record.attempts;
  return rec.dump();
}

PredictionRecord parse_prediction(const std::string& line,
                                  const std::string& origin) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(errc::malformed_file,
                origin + ": invalid JSON at byte " + std::to_string(e.byte) +
                    " (" + e.what() + ")");
  }
  PredictionRecord out;
  try {
    out.instance_id = rec.at("instance_id").get<std::string>();
    const json& pred = rec.at("predicted_index");
    if (!pred.is_null()) out.predicted_index = pred.get<int>();
    out.solver_id = rec.value("solver_id", std::string{});
    if (rec.contains("temperature") && !rec.at("temperature").is_null()) {
      out.temperature = rec.at("temperature").get<double>();
    }
    out.raw_response = rec.value("raw_response", std::string{});
    out.attempts = rec.value("attempts", 1);
  } catch (const json::exception& e) {
    throw Error(errc::malformed_file, origin + ": " + e.what());
  }
  if (out.attempts < 1) {
    throw Error(errc::malformed_file,
                origin + ": record \"" + out.instance_id + "\" has attempts < 1");
  }
  return out;
}

std::vector<PredictionRecord> load_prediction_log(const std::string& path) {
  std::vector<PredictionRecord> records;
  const auto lines = split_lines(read_file(path));
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    records.push_back(
        parse_prediction(lines[i], path + ":" + std::to_string(i + 1)));
  }
  return records;
}

void save_prediction_log(const std::vector<PredictionRecord>& records,
                         const std::string& path) {
  std::string out;
  for (const auto& rec : records) {
    out += serialize_prediction(rec);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace lateral
