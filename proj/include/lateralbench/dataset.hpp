#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lateralbench/error.hpp"

namespace lateral {

// Adversarial variant of a puzzle: the original question, its semantic
// reconstruction (rephrased, same answer), or its context reconstruction
// (same reasoning path, new situation).
enum class Variant { OR, SR, CR };

enum class Subtask { sentence, word };

std::string_view variant_name(Variant v);
std::string_view subtask_name(Subtask s);
std::optional<Variant> variant_from_name(std::string_view name);
std::optional<Subtask> subtask_from_name(std::string_view name);

// One multiple-choice puzzle. gold_index is 0-based everywhere in memory and
// on disk; only the LLM prompt layer speaks 1-based.
struct PuzzleInstance {
  std::string id;
  std::string group_id;
  Variant variant = Variant::OR;
  Subtask subtask = Subtask::sentence;
  std::string question;
  std::vector<std::string> choices;
  int gold_index = 0;

  bool operator==(const PuzzleInstance&) const = default;
};

// The instances sharing one latent reasoning path, keyed by variant.
// Always holds the OR member; SR/CR are optional.
struct AdversarialGroup {
  std::string group_id;
  std::map<Variant, PuzzleInstance> members;

  bool has(Variant v) const { return members.count(v) != 0; }
  bool complete() const { return members.size() == 3; }
};

// Solver output for one instance. predicted_index == nullopt means ABSTAIN
// (retry budget exhausted without a usable answer); scoring counts it as
// incorrect.
struct PredictionRecord {
  std::string instance_id;
  std::optional<int> predicted_index;
  std::string solver_id;
  std::optional<double> temperature;
  std::string raw_response;
  int attempts = 1;

  bool abstained() const { return !predicted_index.has_value(); }
  bool operator==(const PredictionRecord&) const = default;
};

enum class Severity { warning, error };

struct ValidationIssue {
  Severity severity = Severity::error;
  std::string code;      // stable machine-readable tag, e.g. "choices_lt_2"
  std::string subject;   // instance id or group id
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool empty() const { return issues.empty(); }
  bool has_errors() const;
  std::string to_text() const;
};

// Parses a JSON-array dataset file (schema in docs/dataset.schema.json).
// Instances come back in file order. Throws Error with code malformed_file,
// duplicate_id or label_out_of_range; messages name the offending record id
// and byte offset where available.
std::vector<PuzzleInstance> load_dataset(const std::string& path);

// Parses dataset records from an in-memory JSON string. `origin` labels
// error messages.
std::vector<PuzzleInstance> parse_dataset(const std::string& json_text,
                                          const std::string& origin = "<memory>");

// Structural parse only (fields present, right types) with invariants left
// unchecked, so validate() can report every problem instead of dying on the
// first. Still throws malformed_file for unusable JSON.
std::vector<PuzzleInstance> parse_dataset_lenient(
    const std::string& json_text, const std::string& origin = "<memory>");
std::vector<PuzzleInstance> load_dataset_lenient(const std::string& path);

// Serializes instances back to the canonical on-disk JSON array.
std::string serialize_dataset(const std::vector<PuzzleInstance>& instances);
void save_dataset(const std::vector<PuzzleInstance>& instances,
                  const std::string& path);

// Partitions instances into adversarial groups, sorted by group_id.
// Throws missing_original / duplicate_variant.
std::vector<AdversarialGroup> group_instances(
    const std::vector<PuzzleInstance>& instances);

// Reports every invariant and grouping violation without throwing. The
// report is empty iff load + group_instances would both succeed and all
// instance invariants hold. Incomplete groups (missing SR or CR) are
// warnings: they stay legal and are scored over present members only.
ValidationReport validate(const std::vector<PuzzleInstance>& instances);

// Prediction log: JSON-lines, one PredictionRecord per line.
std::string serialize_prediction(const PredictionRecord& record);
PredictionRecord parse_prediction(const std::string& line,
                                  const std::string& origin = "<memory>");
std::vector<PredictionRecord> load_prediction_log(const std::string& path);
void save_prediction_log(const std::vector<PredictionRecord>& records,
                         const std::string& path);

}  // namespace lateral
