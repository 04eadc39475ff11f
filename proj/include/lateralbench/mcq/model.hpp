#pragma once

#include <string>
#include <vector>

#include "lateralbench/dataset.hpp"
#include "lateralbench/mcq/kernels.hpp"
#include "lateralbench/mcq/vocab.hpp"
#include "lateralbench/rng.hpp"

namespace lateral::mcq {

struct EncoderConfig {
  int d_model = 32;
  int n_heads = 4;
  int n_layers = 2;
  int d_ff = 128;
  int max_len = 64;
  int vocab_size = 0;
  uint64_t seed = 0;

  int head_dim() const { return d_model / n_heads; }
  void check() const;  // throws bad_config on inconsistent dims

  bool operator==(const EncoderConfig&) const = default;
};

struct LayerParams {
  Mat wq, wk, wv, wo;              // [d x d]
  Mat bq, bk, bv, bo;              // [1 x d]
  Mat ln1_g, ln1_b, ln2_g, ln2_b;  // [1 x d]
  Mat w1, b1;                      // [d x d_ff], [1 x d_ff]
  Mat w2, b2;                      // [d_ff x d], [1 x d]

  bool operator==(const LayerParams&) const = default;
};

// All weights of the pair-encoding transformer, including the scalar scoring
// head. Doubles throughout. The same structure doubles as the gradient and
// Adam-moment container.
struct ModelParams {
  EncoderConfig config;
  Mat tok_emb;                 // [vocab_size x d]
  Mat pos_emb;                 // [max_len x d]
  std::vector<LayerParams> layers;
  Mat final_ln_g, final_ln_b;  // [1 x d]
  Mat head_w;                  // [1 x d]
  Mat head_b;                  // [1 x 1]

  // Enumerates every parameter tensor in a fixed canonical order.
  template <typename Fn>
  void visit(Fn&& fn) {
    fn("tok_emb", tok_emb);
    fn("pos_emb", pos_emb);
    for (size_t i = 0; i < layers.size(); ++i) {
      auto& l = layers[i];
      fn("wq", l.wq); fn("bq", l.bq);
      fn("wk", l.wk); fn("bk", l.bk);
      fn("wv", l.wv); fn("bv", l.bv);
      fn("wo", l.wo); fn("bo", l.bo);
      fn("ln1_g", l.ln1_g); fn("ln1_b", l.ln1_b);
      fn("w1", l.w1); fn("b1", l.b1);
      fn("w2", l.w2); fn("b2", l.b2);
      fn("ln2_g", l.ln2_g); fn("ln2_b", l.ln2_b);
    }
    fn("final_ln_g", final_ln_g);
    fn("final_ln_b", final_ln_b);
    fn("head_w", head_w);
    fn("head_b", head_b);
  }

  template <typename Fn>
  void visit(Fn&& fn) const {
    const_cast<ModelParams*>(this)->visit(
        [&](const char* name, Mat& m) { fn(name, static_cast<const Mat&>(m)); });
  }

  size_t num_params() const;
  bool all_finite() const;
  void zero();

  // All tensors allocated at their config shapes, zero-filled.
  static ModelParams zeros(const EncoderConfig& config);
  // Weight matrices ~ N(0, 0.02); biases, layer-norm shifts and the scoring
  // head zero; layer-norm gains one. Zero head makes the untrained model
  // exactly uniform.
  static ModelParams init(const EncoderConfig& config, uint64_t seed);

  bool operator==(const ModelParams&) const = default;
};

// Parameter tensors in canonical visit order; lets Adam, serialization and
// finite-difference checks walk two models in lockstep.
inline std::vector<Mat*> tensor_list(ModelParams& params) {
  std::vector<Mat*> out;
  params.visit([&](const char*, Mat& m) { out.push_back(&m); });
  return out;
}

inline std::vector<const Mat*> tensor_list(const ModelParams& params) {
  std::vector<const Mat*> out;
  params.visit([&](const char*, const Mat& m) { out.push_back(&m); });
  return out;
}

// Softmax output over a question's choices.
struct ChoiceDistribution {
  std::vector<double> probs;
};

// Numerically stable softmax (subtracts the max logit). The one softmax used
// at the choice-scoring seam; adding any constant to all logits leaves the
// output unchanged.
std::vector<double> softmax_stable(const std::vector<double>& logits);

// Final-layer hidden state at the CLS position (the pair's feature vector).
// PAD positions never influence it: padded keys are masked out of every
// attention softmax. Throws shape_mismatch when the sequence does not fit
// the config.
std::vector<double> forward(const ModelParams& params, const PairSequence& pair);

// Per-pair scalar logits w . F_i + b, one encoder run per choice.
std::vector<double> choice_logits(const ModelParams& params,
                                  const std::string& question,
                                  const std::vector<std::string>& choices,
                                  const Vocabulary& vocab);

// Runs encode_pair + forward once per choice and softmaxes the pair logits.
ChoiceDistribution score_choices(const ModelParams& params,
                                 const std::string& question,
                                 const std::vector<std::string>& choices,
                                 const Vocabulary& vocab);

// Index of the maximal probability; ties break to the lowest index.
int predict(const ModelParams& params, const PuzzleInstance& instance,
            const Vocabulary& vocab);

// Cross-entropy -log P[gold], in log-sum-exp form.
double loss(const ModelParams& params, const PuzzleInstance& instance,
            const Vocabulary& vocab);

struct GradResult {
  ModelParams grads;  // d(mean batch loss)/d(params)
  double mean_loss = 0.0;
};

// Reverse-mode gradient of the mean loss over the batch. Per-instance
// gradients are computed independently (in parallel) and reduced in batch
// order, so results are deterministic for any thread count.
GradResult grad(const ModelParams& params,
                const std::vector<PuzzleInstance>& batch,
                const Vocabulary& vocab);

}  // namespace lateral::mcq
