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

#include <json.hpp>

#include "mmlayout/attention.hpp"
#include "mmlayout/commonsense.hpp"
#include "mmlayout/config.hpp"
#include "mmlayout/doc_graph.hpp"
#include "mmlayout/embeddings.hpp"
#include "mmlayout/metrics.hpp"
#include "mmlayout/optim.hpp"
#include "mmlayout/tokenizer.hpp"

namespace mmlayout {

// Everything about a page that does not depend on parameters. Built once
// per document and reused across epochs.
struct PreparedDocument {
  DocumentGraph graph;
  TokenizedText tokens;
  Tensor patch_descriptors;        // [W*H, 7]
  std::vector<BBox> fine_boxes;    // normalized; tokens, then patches
  std::vector<int> fine_positions;
  RelativeIndex relative;
  std::vector<BBox> coarse_boxes;  // normalized; segments, then regions
  Tensor commonsense;              // [Z, K]
  std::vector<int> fine_parent;    // fine row -> coarse row (patch p -> Z + region)
  std::vector<int> targets;        // per token; empty when the page has no labels

  size_t text_len() const { return tokens.size(); }
  size_t visual_len() const { return patch_descriptors.rows(); }
  size_t coarse_text_len() const { return static_cast<size_t>(graph.count(NodeKind::kCoarseText)); }
  size_t coarse_visual_len() const { return static_cast<size_t>(graph.count(NodeKind::kCoarseVisual)); }
};

// Stage outputs. Stages skipped by the configuration stay undefined.
struct ForwardResult {
  Var fine_input;     // H_f,0
  Var fine_output;    // H_f,N
  Var aggregated;     // I'_c
  Var commonsense;    // C' for the coarse-text rows
  Var coarse_input;   // I_c
  Var coarse_output;  // H_c,M
  Var fused;          // H
  Var logits;         // [L, tags]
};

// Coarse row r = sum (or mean) of the fine rows i with parent[i] == r.
// Childless coarse rows are zero.
Var aggregate(const Var& fine, std::span<const int> fine_parent, size_t coarse_rows,
              Aggregation mode = Aggregation::kSum);

// h_i = fine_i + coarse_{parent(i)}.
Var fuse(const Var& fine, const Var& coarse, std::span<const int> fine_parent);

class MmLayoutModel {
 public:
  MmLayoutModel(ModelConfig cfg, Vocab vocab);

  const ModelConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  const BioTagSet& tags() const { return tags_; }
  const CommonSenseInventory& inventory() const { return inventory_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const EmbeddingTables& embeddings() const { return embeddings_; }
  const CommonSenseTables* commonsense_tables() const { return cfg_.commonsense_k > 0 ? &commonsense_ : nullptr; }

  PreparedDocument prepare(const Page& page) const;
  PreparedDocument prepare(const Page& page, DocumentGraph graph) const;

  Var fine_input(const PreparedDocument& doc) const;
  Var fine_encode(const Var& input, const RelativeIndex& relative, std::mt19937_64* dropout_rng = nullptr) const;
  // C' for every coarse-text node; undefined when K = 0 or there are no segments.
  Var commonsense_embed(const Tensor& bits) const;
  // Concat(I'_c,t + C' + layout(B_ct), I'_c,v + layout(B_cv)); `commonsense`
  // may be undefined.
  Var coarse_input(const Var& aggregated, const Var& commonsense, std::span<const BBox> coarse_boxes) const;
  Var coarse_encode(const Var& input, std::mt19937_64* dropout_rng = nullptr) const;
  Var labeling_head(const Var& text_rows) const;

  ForwardResult forward(const PreparedDocument& doc, std::mt19937_64* dropout_rng = nullptr) const;
  // Mean cross-entropy over first sub-tokens. Throws if the page is unlabeled.
  Var loss(const PreparedDocument& doc, std::mt19937_64* dropout_rng = nullptr) const;
  // One tag per word, read from the word's first sub-token.
  std::vector<std::string> predict(const PreparedDocument& doc) const;

  // Shapes and Frobenius norms of every defined stage output.
  static nlohmann::json describe(const ForwardResult& r);

 private:
  ModelConfig cfg_;
  Vocab vocab_;
  BioTagSet tags_;
  CommonSenseInventory inventory_;
  ParamStore params_;
  EmbeddingTables embeddings_;
  RelativeBiasTables fine_bias_;
  std::vector<TransformerLayer> fine_layers_;
  CommonSenseTables commonsense_;
  std::vector<TransformerLayer> coarse_layers_;
  Var head_weight_, head_bias_;
};

// Copies every parameter of `from` whose name and shape also exist in `to`.
// Returns the number of tensors copied.
size_t copy_shared_parameters(const ParamStore& from, ParamStore& to);

}  // namespace mmlayout
