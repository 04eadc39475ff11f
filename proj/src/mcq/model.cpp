#include "lateralbench/mcq/model.hpp"

#include <cmath>
#include <cstring>

namespace lateral::mcq {

namespace {
constexpr double kLayerNormEps = 1e-5;
}

void EncoderConfig::check() const {
  if (d_model < 1 || n_heads < 1 || n_layers < 1 || d_ff < 1 || max_len < 4 ||
      vocab_size < kNumSpecialTokens) {
    throw Error(errc::bad_config, "encoder dimensions must be positive "
                                  "(max_len >= 4, vocab_size >= 4)");
  }
  if (d_model % n_heads != 0) {
    throw Error(errc::bad_config,
                "d_model " + std::to_string(d_model) +
                    " not divisible by n_heads " + std::to_string(n_heads));
  }
}

size_t ModelParams::num_params() const {
  size_t n = 0;
  visit([&](const char*, const Mat& m) { n += m.size(); });
  return n;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  visit([&](const char*, const Mat& m) {
    for (double v : m.a) {
      if (!std::isfinite(v)) ok = false;
    }
  });
  return ok;
}

void ModelParams::zero() {
  visit([](const char*, Mat& m) { m.zero(); });
}

ModelParams ModelParams::zeros(const EncoderConfig& config) {
  config.check();
  const int d = config.d_model;
  ModelParams p;
  p.config = config;
  p.tok_emb = Mat(config.vocab_size, d);
  p.pos_emb = Mat(config.max_len, d);
  p.layers.resize(static_cast<size_t>(config.n_layers));
  for (auto& l : p.layers) {
    l.wq = Mat(d, d); l.bq = Mat(1, d);
    l.wk = Mat(d, d); l.bk = Mat(1, d);
    l.wv = Mat(d, d); l.bv = Mat(1, d);
    l.wo = Mat(d, d); l.bo = Mat(1, d);
    l.ln1_g = Mat(1, d); l.ln1_b = Mat(1, d);
    l.w1 = Mat(d, config.d_ff); l.b1 = Mat(1, config.d_ff);
    l.w2 = Mat(config.d_ff, d); l.b2 = Mat(1, d);
    l.ln2_g = Mat(1, d); l.ln2_b = Mat(1, d);
  }
  p.final_ln_g = Mat(1, d);
  p.final_ln_b = Mat(1, d);
  p.head_w = Mat(1, d);
  p.head_b = Mat(1, 1);
  return p;
}

ModelParams ModelParams::init(const EncoderConfig& config, uint64_t seed) {
  ModelParams p = zeros(config);
  Rng rng(derive_seed(seed, 0));
  auto fill_normal = [&](Mat& m) {
    for (double& v : m.a) v = rng.normal(0.0, 0.02);
  };
  auto fill_ones = [&](Mat& m) {
    for (double& v : m.a) v = 1.0;
  };
  fill_normal(p.tok_emb);
  fill_normal(p.pos_emb);
  for (auto& l : p.layers) {
    fill_normal(l.wq);
    fill_normal(l.wk);
    fill_normal(l.wv);
    fill_normal(l.wo);
    fill_normal(l.w1);
    fill_normal(l.w2);
    fill_ones(l.ln1_g);
    fill_ones(l.ln2_g);
  }
  fill_ones(p.final_ln_g);
  // Biases, layer-norm shifts and the scoring head stay zero: the untrained
  // model scores every choice identically.
  return p;
}

std::vector<double> softmax_stable(const std::vector<double>& logits) {
  double max_v = logits[0];
  for (double v : logits) max_v = std::max(max_v, v);
  std::vector<double> probs(logits.size());
  double denom = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_v);
    denom += probs[i];
  }
  for (double& p : probs) p /= denom;
  return probs;
}

namespace {

struct LayerTrace {
  Mat x_in;   // layer input [V x d]
  Mat a;      // LN1 output
  std::vector<double> ln1_mean, ln1_rstd;
  Mat q, k, v;            // projected [V x d]
  std::vector<Mat> attn;  // per-head softmax probabilities [V x V]
  Mat concat;             // heads reassembled [V x d]
  Mat x_mid;              // x_in + attention output
  Mat b;                  // LN2 output
  std::vector<double> ln2_mean, ln2_rstd;
  Mat h1;  // pre-GELU [V x d_ff]
  Mat g;   // post-GELU
};

struct ForwardTrace {
  std::vector<int> ids;  // valid prefix, PAD stripped
  int valid = 0;
  std::vector<LayerTrace> layers;
  Mat x_final;  // last layer output [V x d]
  double fln_mean = 0.0, fln_rstd = 0.0;  // final LN stats, CLS row
  std::vector<double> feature;            // F [d]
};

// PAD is suffix-only; attention computed over the valid prefix equals
// additive -inf masking of every PAD key.
int checked_valid_length(const ModelParams& params, const PairSequence& pair) {
  const auto& cfg = params.config;
  const int len = pair.length();
  if (len == 0 || len > cfg.max_len ||
      pair.attention_mask.size() != pair.token_ids.size()) {
    throw Error(errc::shape_mismatch,
                "pair length " + std::to_string(len) + " vs max_len " +
                    std::to_string(cfg.max_len));
  }
  int valid = 0;
  while (valid < len && pair.attention_mask[valid] == 1) ++valid;
  for (int t = valid; t < len; ++t) {
    if (pair.attention_mask[t] != 0 || pair.token_ids[t] != kPadId) {
      throw Error(errc::shape_mismatch, "PAD must be a masked suffix");
    }
  }
  if (valid == 0) throw Error(errc::shape_mismatch, "no unmasked tokens");
  for (int t = 0; t < valid; ++t) {
    if (pair.token_ids[t] < 0 || pair.token_ids[t] >= cfg.vocab_size) {
      throw Error(errc::shape_mismatch,
                  "token id " + std::to_string(pair.token_ids[t]) +
                      " outside vocabulary of " + std::to_string(cfg.vocab_size));
    }
  }
  return valid;
}

void copy_head(const Mat& full, int head, int head_dim, Mat& out) {
  out = Mat(full.rows, head_dim);
  for (int r = 0; r < full.rows; ++r) {
    std::memcpy(out.row(r), full.row(r) + head * head_dim,
                sizeof(double) * static_cast<size_t>(head_dim));
  }
}

void add_head(const Mat& part, int head, int head_dim, Mat& full) {
  for (int r = 0; r < part.rows; ++r) {
    std::memcpy(full.row(r) + head * head_dim, part.row(r),
                sizeof(double) * static_cast<size_t>(head_dim));
  }
}

Mat linear(const Mat& x, const Mat& w, const Mat& bias) {
  Mat y;
  kernels::matmul(x, w, y);
  kernels::add_bias_rows(y.rows, y.cols, y.a.data(), bias.a.data());
  return y;
}

void forward_traced(const ModelParams& params, const PairSequence& pair,
                    ForwardTrace& trace) {
  const auto& cfg = params.config;
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int hd = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  trace.valid = checked_valid_length(params, pair);
  const int V = trace.valid;
  trace.ids.assign(pair.token_ids.begin(), pair.token_ids.begin() + V);

  Mat x(V, d);
  for (int t = 0; t < V; ++t) {
    const double* tok = params.tok_emb.row(trace.ids[t]);
    const double* pos = params.pos_emb.row(t);
    double* row = x.row(t);
    for (int j = 0; j < d; ++j) row[j] = tok[j] + pos[j];
  }

  trace.layers.clear();
  trace.layers.resize(params.layers.size());
  for (size_t li = 0; li < params.layers.size(); ++li) {
    const LayerParams& lp = params.layers[li];
    LayerTrace& lt = trace.layers[li];
    lt.x_in = x;

    lt.ln1_mean.resize(V);
    lt.ln1_rstd.resize(V);
    lt.a = Mat(V, d);
    kernels::layer_norm_rows(V, d, lt.x_in.a.data(), lp.ln1_g.a.data(),
                             lp.ln1_b.a.data(), kLayerNormEps, lt.a.a.data(),
                             lt.ln1_mean.data(), lt.ln1_rstd.data());

    lt.q = linear(lt.a, lp.wq, lp.bq);
    lt.k = linear(lt.a, lp.wk, lp.bk);
    lt.v = linear(lt.a, lp.wv, lp.bv);

    lt.attn.resize(heads);
    lt.concat = Mat(V, d);
    for (int h = 0; h < heads; ++h) {
      Mat qh, kh, vh;
      copy_head(lt.q, h, hd, qh);
      copy_head(lt.k, h, hd, kh);
      copy_head(lt.v, h, hd, vh);
      Mat scores;
      kernels::matmul_nt(qh, kh, scores);  // [V x V]
      for (double& s : scores.a) s *= scale;
      Mat& probs = lt.attn[h];
      probs = Mat(V, V);
      kernels::masked_softmax_rows(V, V, V, scores.a.data(), probs.a.data());
      Mat ctx;
      kernels::matmul(probs, vh, ctx);
      add_head(ctx, h, hd, lt.concat);
    }

    Mat attn_out = linear(lt.concat, lp.wo, lp.bo);
    lt.x_mid = lt.x_in;
    for (size_t i = 0; i < lt.x_mid.a.size(); ++i) lt.x_mid.a[i] += attn_out.a[i];

    lt.ln2_mean.resize(V);
    lt.ln2_rstd.resize(V);
    lt.b = Mat(V, d);
    kernels::layer_norm_rows(V, d, lt.x_mid.a.data(), lp.ln2_g.a.data(),
                             lp.ln2_b.a.data(), kLayerNormEps, lt.b.a.data(),
                             lt.ln2_mean.data(), lt.ln2_rstd.data());

    lt.h1 = linear(lt.b, lp.w1, lp.b1);
    lt.g = Mat(V, cfg.d_ff);
    kernels::gelu(static_cast<int64_t>(lt.h1.a.size()), lt.h1.a.data(),
                  lt.g.a.data());
    Mat ffn_out = linear(lt.g, lp.w2, lp.b2);

    x = lt.x_mid;
    for (size_t i = 0; i < x.a.size(); ++i) x.a[i] += ffn_out.a[i];
  }
  trace.x_final = x;

  // Final layer norm on the CLS row only; F is the identity extraction of
  // that state.
  trace.feature.resize(d);
  kernels::serial::layer_norm_rows(1, d, trace.x_final.row(0),
                                   params.final_ln_g.a.data(),
                                   params.final_ln_b.a.data(), kLayerNormEps,
                                   trace.feature.data(), &trace.fln_mean,
                                   &trace.fln_rstd);
}

// dx for one layer-normed row given saved stats; accumulates dgamma/dbeta.
void layer_norm_backward_row(int n, const double* x, double mean, double rstd,
                             const double* gamma, const double* dy, double* dx,
                             double* dgamma, double* dbeta) {
  double sum_dxhat = 0.0;
  double sum_dxhat_xhat = 0.0;
  for (int j = 0; j < n; ++j) {
    const double xhat = (x[j] - mean) * rstd;
    const double dxhat = dy[j] * gamma[j];
    sum_dxhat += dxhat;
    sum_dxhat_xhat += dxhat * xhat;
    dgamma[j] += dy[j] * xhat;
    dbeta[j] += dy[j];
  }
  const double inv_n = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    const double xhat = (x[j] - mean) * rstd;
    const double dxhat = dy[j] * gamma[j];
    dx[j] = rstd * (dxhat - inv_n * sum_dxhat - xhat * inv_n * sum_dxhat_xhat);
  }
}

void layer_norm_backward(const Mat& x, const std::vector<double>& mean,
                         const std::vector<double>& rstd, const Mat& gamma,
                         const Mat& dy, Mat& dx, Mat& dgamma, Mat& dbeta) {
  dx = Mat(x.rows, x.cols);
  for (int r = 0; r < x.rows; ++r) {
    layer_norm_backward_row(x.cols, x.row(r), mean[r], rstd[r],
                            gamma.a.data(), dy.row(r), dx.row(r),
                            dgamma.a.data(), dbeta.a.data());
  }
}

void add_colsum(const Mat& dy, Mat& dbias) {
  for (int r = 0; r < dy.rows; ++r) {
    const double* row = dy.row(r);
    for (int j = 0; j < dy.cols; ++j) dbias.a[j] += row[j];
  }
}

// Backward of y = x*W + b: accumulates dW/db, returns dx.
Mat linear_backward(const Mat& x, const Mat& w, const Mat& dy, Mat& dw, Mat& db) {
  Mat dw_local, dx;
  kernels::matmul_tn(x, dy, dw_local);  // [in x out]
  for (size_t i = 0; i < dw.a.size(); ++i) dw.a[i] += dw_local.a[i];
  add_colsum(dy, db);
  kernels::matmul_nt(dy, w, dx);  // dy [V x out] * W^T -> [V x in]
  return dx;
}

// Backprop of one encoded pair from the CLS-feature gradient into `grads`.
void backward_pair(const ModelParams& params, const ForwardTrace& trace,
                   const std::vector<double>& dfeature, ModelParams& grads) {
  const auto& cfg = params.config;
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int hd = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const int V = trace.valid;

  // Final layer norm saw only the CLS row; every other row's gradient is 0.
  Mat dx(V, d);
  layer_norm_backward_row(d, trace.x_final.row(0), trace.fln_mean,
                          trace.fln_rstd, params.final_ln_g.a.data(),
                          dfeature.data(), dx.row(0), grads.final_ln_g.a.data(),
                          grads.final_ln_b.a.data());

  for (int li = static_cast<int>(params.layers.size()) - 1; li >= 0; --li) {
    const LayerParams& lp = params.layers[static_cast<size_t>(li)];
    const LayerTrace& lt = trace.layers[static_cast<size_t>(li)];
    LayerParams& lg = grads.layers[static_cast<size_t>(li)];

    // FFN block: x_out = x_mid + (gelu(LN2(x_mid)*W1 + b1))*W2 + b2
    Mat dg = linear_backward(lt.g, lp.w2, dx, lg.w2, lg.b2);
    Mat dh1(V, cfg.d_ff);
    kernels::gelu_backward(static_cast<int64_t>(dh1.a.size()), lt.h1.a.data(),
                           dg.a.data(), dh1.a.data());
    Mat db_ln2 = linear_backward(lt.b, lp.w1, dh1, lg.w1, lg.b1);
    Mat dx_mid;
    layer_norm_backward(lt.x_mid, lt.ln2_mean, lt.ln2_rstd, lp.ln2_g, db_ln2,
                        dx_mid, lg.ln2_g, lg.ln2_b);
    for (size_t i = 0; i < dx_mid.a.size(); ++i) dx_mid.a[i] += dx.a[i];

    // Attention block: x_mid = x_in + (heads(LN1(x_in)))*Wo + bo
    Mat dconcat = linear_backward(lt.concat, lp.wo, dx_mid, lg.wo, lg.bo);
    Mat dq(V, d), dk(V, d), dv(V, d);
    for (int h = 0; h < heads; ++h) {
      Mat kh, qh, vh, dctx;
      copy_head(lt.k, h, hd, kh);
      copy_head(lt.q, h, hd, qh);
      copy_head(lt.v, h, hd, vh);
      copy_head(dconcat, h, hd, dctx);

      const Mat& probs = lt.attn[h];
      Mat dprobs, dvh;
      kernels::matmul_nt(dctx, vh, dprobs);   // [V x V]
      kernels::matmul_tn(probs, dctx, dvh);   // [V x hd]
      Mat dscores(V, V);
      kernels::softmax_backward_rows(V, V, probs.a.data(), dprobs.a.data(),
                                     dscores.a.data());
      for (double& s : dscores.a) s *= scale;
      Mat dqh, dkh;
      kernels::matmul(dscores, kh, dqh);      // [V x hd]
      kernels::matmul_tn(dscores, qh, dkh);   // [V x hd]
      add_head(dqh, h, hd, dq);
      add_head(dkh, h, hd, dk);
      add_head(dvh, h, hd, dv);
    }

    Mat da_q = linear_backward(lt.a, lp.wq, dq, lg.wq, lg.bq);
    Mat da_k = linear_backward(lt.a, lp.wk, dk, lg.wk, lg.bk);
    Mat da_v = linear_backward(lt.a, lp.wv, dv, lg.wv, lg.bv);
    Mat da = da_q;
    for (size_t i = 0; i < da.a.size(); ++i) da.a[i] += da_k.a[i] + da_v.a[i];

    Mat dx_in;
    layer_norm_backward(lt.x_in, lt.ln1_mean, lt.ln1_rstd, lp.ln1_g, da,
                        dx_in, lg.ln1_g, lg.ln1_b);
    for (size_t i = 0; i < dx_in.a.size(); ++i) dx_in.a[i] += dx_mid.a[i];
    dx = dx_in;
  }

  for (int t = 0; t < V; ++t) {
    double* dtok = grads.tok_emb.row(trace.ids[t]);
    double* dpos = grads.pos_emb.row(t);
    const double* row = dx.row(t);
    for (int j = 0; j < d; ++j) {
      dtok[j] += row[j];
      dpos[j] += row[j];
    }
  }
}

double pair_logit(const ModelParams& params, const std::vector<double>& feature) {
  double r = params.head_b.a[0];
  for (int j = 0; j < params.config.d_model; ++j) {
    r += params.head_w.a[static_cast<size_t>(j)] * feature[static_cast<size_t>(j)];
  }
  return r;
}

// Loss (log-sum-exp form) and gradient accumulation for one instance.
double instance_backward(const ModelParams& params, const PuzzleInstance& inst,
                         const Vocabulary& vocab, ModelParams& grads) {
  const int n = static_cast<int>(inst.choices.size());
  std::vector<ForwardTrace> traces(static_cast<size_t>(n));
  std::vector<double> logits(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const PairSequence pair = encode_pair(inst.question, inst.choices[i], vocab,
                                          params.config.max_len);
    forward_traced(params, pair, traces[static_cast<size_t>(i)]);
    logits[static_cast<size_t>(i)] =
        pair_logit(params, traces[static_cast<size_t>(i)].feature);
  }

  double max_v = logits[0];
  for (double v : logits) max_v = std::max(max_v, v);
  double sum_exp = 0.0;
  for (double v : logits) sum_exp += std::exp(v - max_v);
  const double lse = max_v + std::log(sum_exp);
  const double loss_value = lse - logits[static_cast<size_t>(inst.gold_index)];

  const int d = params.config.d_model;
  for (int i = 0; i < n; ++i) {
    const double p = std::exp(logits[static_cast<size_t>(i)] - lse);
    const double dlogit = p - (i == inst.gold_index ? 1.0 : 0.0);
    const auto& feature = traces[static_cast<size_t>(i)].feature;
    grads.head_b.a[0] += dlogit;
    std::vector<double> dfeature(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
      grads.head_w.a[static_cast<size_t>(j)] +=
          dlogit * feature[static_cast<size_t>(j)];
      dfeature[static_cast<size_t>(j)] =
          dlogit * params.head_w.a[static_cast<size_t>(j)];
    }
    backward_pair(params, traces[static_cast<size_t>(i)], dfeature, grads);
  }
  return loss_value;
}

}  // namespace

std::vector<double> forward(const ModelParams& params, const PairSequence& pair) {
  ForwardTrace trace;
  forward_traced(params, pair, trace);
  return trace.feature;
}

std::vector<double> choice_logits(const ModelParams& params,
                                  const std::string& question,
                                  const std::vector<std::string>& choices,
                                  const Vocabulary& vocab) {
  std::vector<double> logits(choices.size());
  for (size_t i = 0; i < choices.size(); ++i) {
    const PairSequence pair =
        encode_pair(question, choices[i], vocab, params.config.max_len);
    logits[i] = pair_logit(params, forward(params, pair));
  }
  return logits;
}

ChoiceDistribution score_choices(const ModelParams& params,
                                 const std::string& question,
                                 const std::vector<std::string>& choices,
                                 const Vocabulary& vocab) {
  if (choices.size() < 2) {
    throw Error(errc::shape_mismatch, "scoring needs at least 2 choices");
  }
  return {softmax_stable(choice_logits(params, question, choices, vocab))};
}

int predict(const ModelParams& params, const PuzzleInstance& instance,
            const Vocabulary& vocab) {
  const auto dist =
      score_choices(params, instance.question, instance.choices, vocab);
  int best = 0;
  for (size_t i = 1; i < dist.probs.size(); ++i) {
    if (dist.probs[i] > dist.probs[best]) best = static_cast<int>(i);
  }
  return best;
}

double loss(const ModelParams& params, const PuzzleInstance& instance,
            const Vocabulary& vocab) {
  const auto logits =
      choice_logits(params, instance.question, instance.choices, vocab);
  double max_v = logits[0];
  for (double v : logits) max_v = std::max(max_v, v);
  double sum_exp = 0.0;
  for (double v : logits) sum_exp += std::exp(v - max_v);
  return max_v + std::log(sum_exp) -
         logits[static_cast<size_t>(instance.gold_index)];
}

GradResult grad(const ModelParams& params,
                const std::vector<PuzzleInstance>& batch,
                const Vocabulary& vocab) {
  if (batch.empty()) {
    throw Error(errc::bad_config, "gradient of an empty batch");
  }
  const int n = static_cast<int>(batch.size());
  std::vector<ModelParams> per_instance(static_cast<size_t>(n));
  std::vector<double> losses(static_cast<size_t>(n));

  // Instances are independent; the reduction below runs in batch order, so
  // the result is identical for any thread count.
#pragma omp parallel for schedule(dynamic) if (n > 1)
  for (int i = 0; i < n; ++i) {
    per_instance[static_cast<size_t>(i)] = ModelParams::zeros(params.config);
    losses[static_cast<size_t>(i)] =
        instance_backward(params, batch[static_cast<size_t>(i)], vocab,
                          per_instance[static_cast<size_t>(i)]);
  }

  GradResult result;
  result.grads = ModelParams::zeros(params.config);
  auto dst = tensor_list(result.grads);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    auto src = tensor_list(per_instance[static_cast<size_t>(i)]);
    for (size_t t = 0; t < dst.size(); ++t) {
      for (size_t j = 0; j < dst[t]->a.size(); ++j) {
        dst[t]->a[j] += src[t]->a[j] * inv_n;
      }
    }
    result.mean_loss += losses[static_cast<size_t>(i)] * inv_n;
  }
  return result;
}

}  // namespace lateral::mcq
