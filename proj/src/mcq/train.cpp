#include "lateralbench/mcq/train.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lateralbench/io.hpp"

namespace lateral::mcq {

void TrainConfig::check() const {
  if (epochs < 0 || lr < 0.0 || batch_size < 1) {
    throw Error(errc::bad_config,
                "epochs/lr must be >= 0 and batch_size >= 1");
  }
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 ||
      adam_eps <= 0.0) {
    throw Error(errc::bad_config, "Adam betas must lie in [0,1), eps > 0");
  }
}

double train_accuracy(const ModelParams& params,
                      const std::vector<PuzzleInstance>& dataset,
                      const Vocabulary& vocab) {
  if (dataset.empty()) return 0.0;
  const int n = static_cast<int>(dataset.size());
  std::vector<uint8_t> hit(static_cast<size_t>(n), 0);
#pragma omp parallel for schedule(dynamic) if (n > 1)
  for (int i = 0; i < n; ++i) {
    const auto& inst = dataset[static_cast<size_t>(i)];
    hit[static_cast<size_t>(i)] =
        predict(params, inst, vocab) == inst.gold_index ? 1 : 0;
  }
  const long correct = std::accumulate(hit.begin(), hit.end(), 0L);
  return static_cast<double>(correct) / n;
}

namespace {

// Adam with bias correction; moments share the ModelParams layout.
struct AdamState {
  ModelParams m;
  ModelParams v;
  long t = 0;

  explicit AdamState(const EncoderConfig& config)
      : m(ModelParams::zeros(config)), v(ModelParams::zeros(config)) {}

  void step(ModelParams& params, const ModelParams& grads,
            const TrainConfig& cfg) {
    ++t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    auto ps = tensor_list(params);
    auto gs = tensor_list(grads);
    auto ms = tensor_list(m);
    auto vs = tensor_list(v);
    for (size_t i = 0; i < ps.size(); ++i) {
      double* p = ps[i]->a.data();
      const double* g = gs[i]->a.data();
      double* mm = ms[i]->a.data();
      double* vv = vs[i]->a.data();
      const size_t n = ps[i]->a.size();
      for (size_t j = 0; j < n; ++j) {
        mm[j] = cfg.beta1 * mm[j] + (1.0 - cfg.beta1) * g[j];
        vv[j] = cfg.beta2 * vv[j] + (1.0 - cfg.beta2) * g[j] * g[j];
        const double mhat = mm[j] / bc1;
        const double vhat = vv[j] / bc2;
        p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      }
    }
  }
};

}  // namespace

TrainResult train(ModelParams params, const std::vector<PuzzleInstance>& dataset,
                  const Vocabulary& vocab, const TrainConfig& config) {
  config.check();
  if (dataset.empty()) {
    throw Error(errc::bad_config, "training needs a non-empty dataset");
  }

  AdamState adam(params.config);
  Rng shuffle_rng(derive_seed(config.seed, 1));
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  ModelParams last_good = params;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    long loss_count = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<PuzzleInstance> batch;
      batch.reserve(end - start);
      for (size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);

      GradResult g = grad(params, batch, vocab);
      if (!std::isfinite(g.mean_loss)) {
        throw NonFiniteLossError(
            "batch loss became non-finite in epoch " + std::to_string(epoch + 1),
            std::move(last_good), std::move(result.log));
      }
      loss_sum += g.mean_loss * static_cast<double>(batch.size());
      loss_count += static_cast<long>(batch.size());
      adam.step(params, g.grads, config);
    }

    if (!params.all_finite()) {
      throw NonFiniteLossError(
          "parameters became non-finite in epoch " + std::to_string(epoch + 1),
          std::move(last_good), std::move(result.log));
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.mean_loss = loss_sum / static_cast<double>(loss_count);
    stats.train_accuracy = train_accuracy(params, dataset, vocab);
    result.log.push_back(stats);
    last_good = params;
  }

  result.params = std::move(params);
  return result;
}

std::string serialize_train_log(const std::vector<EpochStats>& log) {
  std::string out;
  for (const auto& stats : log) {
    nlohmann::ordered_json rec;
    rec["epoch"] = stats.epoch;
    rec["mean_loss"] = stats.mean_loss;
    rec["train_accuracy"] = stats.train_accuracy;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void save_train_log(const std::vector<EpochStats>& log, const std::string& path) {
  write_file(path, serialize_train_log(log));
}

}  // namespace lateral::mcq
