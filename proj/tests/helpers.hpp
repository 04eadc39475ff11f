#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "lateralbench/dataset.hpp"
#include "lateralbench/rng.hpp"

namespace testutil {

using lateral::AdversarialGroup;
using lateral::PredictionRecord;
using lateral::PuzzleInstance;
using lateral::Subtask;
using lateral::Variant;

inline PuzzleInstance make_instance(std::string id, std::string group_id,
                                    Variant variant, int gold,
                                    std::vector<std::string> choices =
                                        {"alpha", "bravo", "charlie", "delta"},
                                    std::string question = "which token wins") {
  PuzzleInstance inst;
  inst.id = std::move(id);
  inst.group_id = std::move(group_id);
  inst.variant = variant;
  inst.subtask = Subtask::sentence;
  inst.question = std::move(question);
  inst.choices = std::move(choices);
  inst.gold_index = gold;
  return inst;
}

inline PredictionRecord make_prediction(std::string instance_id,
                                        std::optional<int> index,
                                        std::string solver = "test") {
  PredictionRecord rec;
  rec.instance_id = std::move(instance_id);
  rec.predicted_index = index;
  rec.solver_id = std::move(solver);
  rec.attempts = 1;
  return rec;
}

// Random dataset of complete OR/SR/CR groups with unique question texts,
// plus predictions that hit gold with probability `hit_rate`.
struct RandomCorpus {
  std::vector<PuzzleInstance> instances;
  std::vector<PredictionRecord> predictions;
};

inline RandomCorpus random_corpus(lateral::Rng& rng, int max_groups = 20,
                                  double hit_rate = 0.5) {
  RandomCorpus corpus;
  const int n_groups = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_groups)));
  for (int g = 0; g < n_groups; ++g) {
    for (Variant v : {Variant::OR, Variant::SR, Variant::CR}) {
      const std::string id = "g" + std::to_string(g) + "_" +
                             std::string(lateral::variant_name(v));
      const int n_choices = 2 + static_cast<int>(rng.below(4));
      std::vector<std::string> choices;
      for (int c = 0; c < n_choices; ++c) {
        choices.push_back("choice " + std::to_string(c) + " of " + id);
      }
      const int gold = static_cast<int>(rng.below(static_cast<uint64_t>(n_choices)));
      corpus.instances.push_back(make_instance(
          id, "g" + std::to_string(g), v, gold, choices, "question for " + id));

      std::optional<int> predicted;
      const double roll = rng.uniform();
      if (roll < hit_rate) {
        predicted = gold;
      } else if (roll < hit_rate + 0.1) {
        predicted = std::nullopt;  // ABSTAIN
      } else {
        predicted = static_cast<int>(rng.below(static_cast<uint64_t>(n_choices)));
      }
      corpus.predictions.push_back(make_prediction(id, predicted));
    }
  }
  return corpus;
}

// Brute-force counting oracles, written before the metrics module and kept
// free of it: plain loops over the raw records.
inline std::optional<double> oracle_instance_accuracy(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<PuzzleInstance>& instances,
    std::optional<Variant> variant_filter) {
  long total = 0;
  long correct = 0;
  for (const auto& inst : instances) {
    if (variant_filter && inst.variant != *variant_filter) continue;
    ++total;
    for (const auto& pred : predictions) {
      if (pred.instance_id != inst.id) continue;
      if (pred.predicted_index && *pred.predicted_index == inst.gold_index) {
        ++correct;
      }
      break;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

inline std::optional<double> oracle_group_accuracy(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<PuzzleInstance>& instances,
    const std::vector<Variant>& required) {
  std::vector<std::string> group_ids;
  for (const auto& inst : instances) {
    bool seen = false;
    for (const auto& g : group_ids) seen = seen || g == inst.group_id;
    if (!seen) group_ids.push_back(inst.group_id);
  }
  long eligible = 0;
  long solved = 0;
  for (const auto& gid : group_ids) {
    bool has_all = true;
    bool all_correct = true;
    for (Variant v : required) {
      const PuzzleInstance* member = nullptr;
      for (const auto& inst : instances) {
        if (inst.group_id == gid && inst.variant == v) member = &inst;
      }
      if (!member) {
        has_all = false;
        break;
      }
      bool hit = false;
      for (const auto& pred : predictions) {
        if (pred.instance_id == member->id) {
          hit = pred.predicted_index &&
                *pred.predicted_index == member->gold_index;
          break;
        }
      }
      all_correct = all_correct && hit;
    }
    if (!has_all) continue;
    ++eligible;
    if (all_correct) ++solved;
  }
  if (eligible == 0) return std::nullopt;
  return static_cast<double>(solved) / static_cast<double>(eligible);
}

// Fresh directory under the build tree's temp space, removed by the caller
// or left for inspection on failure.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lateralbench_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
