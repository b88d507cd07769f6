// Copyright 2026 The mmLayout Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmlayout/attention.hpp"

#include <cmath>
#include <cstdlib>

#include "mmlayout/error.hpp"

namespace mmlayout {

AttentionConfig AttentionConfig::from(const ModelConfig& cfg) {
  return {cfg.d_model, cfg.heads, cfg.rel_1d_buckets, cfg.rel_2d_buckets, cfg.rel_1d_max_distance,
          cfg.rel_2d_max_distance};
}

int rel_bucket(int offset, int buckets, int max_distance) {
  const int half = buckets / 2;
  const int base = offset > 0 ? half : 0;
  const int n = std::abs(offset);
  const int exact = half / 2;
  if (n < exact || exact == 0) return base + std::min(n, half - 1);
  const double ratio = std::log(static_cast<double>(n) / exact) /
                       std::log(static_cast<double>(std::max(max_distance, exact + 1)) / exact);
  const int b = exact + static_cast<int>(ratio * (half - exact));
  return base + std::min(b, half - 1);
}

AttentionWeights AttentionWeights::create(ParamStore& store, const std::string& prefix, int d_model,
                                          double init_std, std::mt19937_64& rng) {
  const size_t d = static_cast<size_t>(d_model);
  AttentionWeights w;
  w.wq = store.add(prefix + ".wq", truncated_normal({d, d}, init_std, rng));
  w.bq = store.add(prefix + ".bq", Tensor({d}), false);
  w.wk = store.add(prefix + ".wk", truncated_normal({d, d}, init_std, rng));
  w.wv = store.add(prefix + ".wv", truncated_normal({d, d}, init_std, rng));
  w.bv = store.add(prefix + ".bv", Tensor({d}), false);
  w.wo = store.add(prefix + ".wo", truncated_normal({d, d}, init_std, rng));
  w.bo = store.add(prefix + ".bo", Tensor({d}), false);
  return w;
}

RelativeBiasTables RelativeBiasTables::create(ParamStore& store, const std::string& prefix,
                                              const AttentionConfig& cfg, double init_std, std::mt19937_64& rng) {
  const size_t heads = static_cast<size_t>(cfg.heads);
  RelativeBiasTables t;
  t.r1d = store.add(prefix + ".rel_1d", truncated_normal({static_cast<size_t>(cfg.rel_1d_buckets), heads}, init_std, rng), false);
  t.rx = store.add(prefix + ".rel_x", truncated_normal({static_cast<size_t>(cfg.rel_2d_buckets), heads}, init_std, rng), false);
  t.ry = store.add(prefix + ".rel_y", truncated_normal({static_cast<size_t>(cfg.rel_2d_buckets), heads}, init_std, rng), false);
  return t;
}

RelativeIndex RelativeIndex::build(std::span<const BBox> boxes, std::span<const int> positions,
                                   const AttentionConfig& cfg) {
  if (boxes.size() != positions.size()) throw ShapeError("spatial attention: boxes and positions disagree in length");
  RelativeIndex r;
  r.n = boxes.size();
  r.pos1d.resize(r.n * r.n);
  r.x.resize(r.n * r.n);
  r.y.resize(r.n * r.n);
  for (size_t i = 0; i < r.n; ++i) {
    for (size_t j = 0; j < r.n; ++j) {
      const size_t k = i * r.n + j;
      r.pos1d[k] = rel_bucket(positions[j] - positions[i], cfg.rel_1d_buckets, cfg.rel_1d_max_distance);
      r.x[k] = rel_bucket(static_cast<int>(std::lround(boxes[j].x0 - boxes[i].x0)), cfg.rel_2d_buckets,
                          cfg.rel_2d_max_distance);
      r.y[k] = rel_bucket(static_cast<int>(std::lround(boxes[j].y0 - boxes[i].y0)), cfg.rel_2d_buckets,
                          cfg.rel_2d_max_distance);
    }
  }
  return r;
}

namespace {

Var multi_head(const AttentionConfig& cfg, const AttentionWeights& w, const Var& h, const RelativeBiasTables* bias,
               const RelativeIndex* index, std::vector<Tensor>* probs) {
  if (h.shape().size() != 2 || h.cols() != static_cast<size_t>(cfg.d_model)) {
    throw ShapeError("attention: input " + shape_string(h.shape()) + " does not have width " +
                     std::to_string(cfg.d_model));
  }
  const size_t n = h.rows();
  if (index && index->n != n) throw ShapeError("spatial attention: layout length does not match input rows");
  const size_t dk = static_cast<size_t>(cfg.head_dim());
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
  Var q = ops::linear(h, w.wq, w.bq);
  Var k = ops::matmul(h, w.wk);
  Var v = ops::linear(h, w.wv, w.bv);
  if (probs) probs->clear();
  std::vector<Var> heads;
  heads.reserve(cfg.heads);
  for (size_t hd = 0; hd < static_cast<size_t>(cfg.heads); ++hd) {
    Var qh = ops::slice_cols(q, hd * dk, dk);
    Var kh = ops::slice_cols(k, hd * dk, dk);
    Var vh = ops::slice_cols(v, hd * dk, dk);
    Var scores = ops::scale(ops::matmul_nt(qh, kh), inv_sqrt);
    if (bias) {
      Var b = ops::add(ops::gather_bias(bias->r1d, index->pos1d, n, hd), ops::gather_bias(bias->rx, index->x, n, hd));
      b = ops::add(b, ops::gather_bias(bias->ry, index->y, n, hd));
      scores = ops::add(scores, b);
    }
    Var a = ops::softmax_rows(scores);
    if (probs) probs->push_back(a.value());
    heads.push_back(ops::matmul(a, vh));
  }
  return ops::linear(ops::concat_cols(heads), w.wo, w.bo);
}

}  // namespace

Var attention(const AttentionConfig& cfg, const AttentionWeights& w, const Var& h, std::vector<Tensor>* probs) {
  return multi_head(cfg, w, h, nullptr, nullptr, probs);
}

Var spatial_mha(const AttentionConfig& cfg, const AttentionWeights& w, const RelativeBiasTables& bias, const Var& h,
                std::span<const BBox> boxes, std::span<const int> positions, std::vector<Tensor>* probs) {
  if (boxes.size() != h.rows()) throw ShapeError("spatial attention: one box per input row required");
  return spatial_mha(cfg, w, bias, h, RelativeIndex::build(boxes, positions, cfg), probs);
}

Var spatial_mha(const AttentionConfig& cfg, const AttentionWeights& w, const RelativeBiasTables& bias, const Var& h,
                const RelativeIndex& index, std::vector<Tensor>* probs) {
  return multi_head(cfg, w, h, &bias, &index, probs);
}

TransformerLayer TransformerLayer::create(ParamStore& store, const std::string& prefix, const ModelConfig& cfg,
                                          std::mt19937_64& rng) {
  const size_t d = static_cast<size_t>(cfg.d_model);
  const size_t f = static_cast<size_t>(cfg.ffn_width());
  TransformerLayer l;
  l.cfg_ = AttentionConfig::from(cfg);
  l.attn_ = AttentionWeights::create(store, prefix + ".attn", cfg.d_model, cfg.init_std, rng);
  l.ln1_gain_ = store.add(prefix + ".ln1.gain", Tensor({d}, 1.0), false);
  l.ln1_bias_ = store.add(prefix + ".ln1.bias", Tensor({d}), false);
  l.w1_ = store.add(prefix + ".ffn.w1", truncated_normal({d, f}, cfg.init_std, rng));
  l.b1_ = store.add(prefix + ".ffn.b1", Tensor({f}), false);
  l.w2_ = store.add(prefix + ".ffn.w2", truncated_normal({f, d}, cfg.init_std, rng));
  l.b2_ = store.add(prefix + ".ffn.b2", Tensor({d}), false);
  l.ln2_gain_ = store.add(prefix + ".ln2.gain", Tensor({d}, 1.0), false);
  l.ln2_bias_ = store.add(prefix + ".ln2.bias", Tensor({d}), false);
  l.activation_ = cfg.activation;
  l.dropout_ = cfg.dropout;
  return l;
}

Var TransformerLayer::finish(const Var& h, const Var& attended, std::mt19937_64* rng) const {
  Var a = rng ? ops::dropout(attended, dropout_, *rng) : attended;
  Var x = ops::layer_norm(ops::add(h, a), ln1_gain_, ln1_bias_);
  Var inner = ops::linear(x, w1_, b1_);
  inner = activation_ == Activation::kGelu ? ops::gelu(inner) : ops::relu(inner);
  Var ffn = ops::linear(inner, w2_, b2_);
  if (rng) ffn = ops::dropout(ffn, dropout_, *rng);
  return ops::layer_norm(ops::add(x, ffn), ln2_gain_, ln2_bias_);
}

Var TransformerLayer::forward(const Var& h, std::mt19937_64* rng) const {
  return finish(h, attention(cfg_, attn_, h), rng);
}

Var TransformerLayer::forward(const Var& h, const RelativeBiasTables& bias, const RelativeIndex& index,
                              std::mt19937_64* rng) const {
  return finish(h, spatial_mha(cfg_, attn_, bias, h, index), rng);
}

}  // namespace mmlayout
