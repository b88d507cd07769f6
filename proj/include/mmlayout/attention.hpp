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

#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmlayout/autodiff.hpp"
#include "mmlayout/config.hpp"
#include "mmlayout/geometry.hpp"
#include "mmlayout/optim.hpp"

namespace mmlayout {

struct AttentionConfig {
  int d_model = 64;
  int heads = 4;
  int rel_1d_buckets = 32;
  int rel_2d_buckets = 32;
  int rel_1d_max_distance = 128;
  int rel_2d_max_distance = 1000;

  static AttentionConfig from(const ModelConfig& cfg);
  int head_dim() const { return d_model / heads; }
};

// Sign-symmetric log bucketing of a signed offset. Half of the buckets hold
// non-positive offsets and half positive ones; |offset| < buckets/4 gets an
// exact bucket, larger offsets are spaced logarithmically up to
// max_distance and saturate beyond. Offset 0 maps to bucket 0.
int rel_bucket(int offset, int buckets, int max_distance);

struct AttentionWeights {
  // No key bias: it adds a constant to each score row, which softmax cancels.
  Var wq, bq, wk, wv, bv, wo, bo;

  static AttentionWeights create(ParamStore& store, const std::string& prefix, int d_model, double init_std,
                                 std::mt19937_64& rng);
};

// Learnable per-head scalars indexed by bucket: [buckets, heads].
struct RelativeBiasTables {
  Var r1d;
  Var rx;
  Var ry;

  static RelativeBiasTables create(ParamStore& store, const std::string& prefix, const AttentionConfig& cfg,
                                   double init_std, std::mt19937_64& rng);
};

// Bucket indices for every (i, j) pair, computed once per document and
// reused by every spatial layer.
struct RelativeIndex {
  size_t n = 0;
  std::vector<int> pos1d;
  std::vector<int> x;
  std::vector<int> y;

  static RelativeIndex build(std::span<const BBox> normalized_boxes, std::span<const int> positions,
                             const AttentionConfig& cfg);
};

// Canonical multi-head self-attention: per head softmax(Q K^T / sqrt(d_k)) V,
// heads concatenated and projected by W_o. If `probs` is non-null it
// receives the per-head attention matrices.
Var attention(const AttentionConfig& cfg, const AttentionWeights& w, const Var& h,
              std::vector<Tensor>* probs = nullptr);

// Spatial-aware variant: per head, R_1D(bucket(p_j - p_i)) + R_X(bucket(x0_j -
// x0_i)) + R_Y(bucket(y0_j - y0_i)) is added to the scaled scores before the
// softmax.
Var spatial_mha(const AttentionConfig& cfg, const AttentionWeights& w, const RelativeBiasTables& bias,
                const Var& h, std::span<const BBox> normalized_boxes, std::span<const int> positions,
                std::vector<Tensor>* probs = nullptr);
Var spatial_mha(const AttentionConfig& cfg, const AttentionWeights& w, const RelativeBiasTables& bias,
                const Var& h, const RelativeIndex& index, std::vector<Tensor>* probs = nullptr);

// Post-norm Transformer layer: x = LN(h + MHA(h)); out = LN(x + FFN(x)),
// FFN = W2 act(W1 x + b1) + b2.
class TransformerLayer {
 public:
  static TransformerLayer create(ParamStore& store, const std::string& prefix, const ModelConfig& cfg,
                                 std::mt19937_64& rng);

  // Canonical attention.
  Var forward(const Var& h, std::mt19937_64* dropout_rng = nullptr) const;
  // Spatial-aware attention with the given bias tables.
  Var forward(const Var& h, const RelativeBiasTables& bias, const RelativeIndex& index,
              std::mt19937_64* dropout_rng = nullptr) const;

  const AttentionWeights& attention_weights() const { return attn_; }
  AttentionWeights& attention_weights() { return attn_; }
  Var ffn_out_weight() const { return w2_; }
  Var ffn_out_bias() const { return b2_; }

 private:
  Var finish(const Var& h, const Var& attended, std::mt19937_64* dropout_rng) const;

  AttentionConfig cfg_;
  AttentionWeights attn_;
  Var ln1_gain_, ln1_bias_;
  Var w1_, b1_, w2_, b2_;
  Var ln2_gain_, ln2_bias_;
  Activation activation_ = Activation::kGelu;
  double dropout_ = 0.0;
};

}  // namespace mmlayout
