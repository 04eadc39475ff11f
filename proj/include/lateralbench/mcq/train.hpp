#pragma once

#include <string>
#include <vector>

#include "lateralbench/mcq/model.hpp"

namespace lateral::mcq {

// Training hyperparameters. Defaults: 5 epochs, lr 5e-5, batch 16,
// Adam(0.9, 0.999, 1e-8), no warmup or decay.
struct TrainConfig {
  int epochs = 5;
  double lr = 5e-5;
  int batch_size = 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;

  void check() const;  // throws bad_config on non-positive values
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> log;
};

// Thrown when a batch loss goes non-finite. Carries the last-good parameters
// (the most recent epoch boundary) and the log up to that point, so callers
// can still checkpoint.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(std::string message, ModelParams last_good,
                     std::vector<EpochStats> log)
      : Error(errc::non_finite_loss, message),
        last_good_params(std::move(last_good)),
        partial_log(std::move(log)) {}

  ModelParams last_good_params;
  std::vector<EpochStats> partial_log;
};

// Adam training loop over shuffled minibatches. Deterministic given
// config.seed: the parameter-init stream and per-epoch shuffle stream are
// both derived from it, and gradient reduction order is fixed.
TrainResult train(ModelParams params, const std::vector<PuzzleInstance>& dataset,
                  const Vocabulary& vocab, const TrainConfig& config);

// Training log as JSON-lines, one {epoch, mean_loss, train_accuracy} per
// line.
std::string serialize_train_log(const std::vector<EpochStats>& log);
void save_train_log(const std::vector<EpochStats>& log, const std::string& path);

// Fraction of instances whose argmax prediction hits gold.
double train_accuracy(const ModelParams& params,
                      const std::vector<PuzzleInstance>& dataset,
                      const Vocabulary& vocab);

}  // namespace lateral::mcq
