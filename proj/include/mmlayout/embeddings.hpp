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
#include <vector>

#include "mmlayout/autodiff.hpp"
#include "mmlayout/config.hpp"
#include "mmlayout/doc_graph.hpp"
#include "mmlayout/optim.hpp"
#include "mmlayout/tokenizer.hpp"

namespace mmlayout {

enum TokenType : int { kTextToken = 0, kVisualToken = 1 };

// Raw per-patch descriptor: mean R, G, B in [0,1] followed by the patch
// centre and size as page fractions.
inline constexpr size_t kPatchDescriptorWidth = 7;

// Input embedding tables. The token-type and 1D-position tables are shared
// by the text and visual paths; the coordinate tables are shared by the fine
// and coarse layout embeddings.
struct EmbeddingTables {
  Var word;        // [vocab, d]
  Var token_type;  // [2, d]
  Var position;    // [max_len, d]
  Var x_coord;     // [1001, d/6]
  Var y_coord;     // [1001, d/6]
  Var patch_weight;  // [7, d]
  Var patch_bias;    // [d]
  size_t d_model = 0;
  size_t max_len = 0;

  static EmbeddingTables create(ParamStore& store, const ModelConfig& cfg, size_t vocab_size, std::mt19937_64& rng);
};

struct VisualGrid {
  PatchGrid grid;
  Var features;  // [W*H, d]
  std::vector<BBox> boxes;  // page coordinates, raster order
};

// t_i = E_w(w_i) + E_t(text) + E_p(i), positions from 0.
Var embed_text(const EmbeddingTables& t, std::span<const int> ids);

// Raw descriptors (no learnable part). Uses page.image when loaded, zeros
// for the colour channels otherwise. Throws if page.image_path is set but the
// raster cannot be read.
Tensor patch_descriptors(const Page& page, PatchGrid grid);

// Projects the descriptors to d with the learnable patch map.
VisualGrid patch_features(const EmbeddingTables& t, const Page& page, PatchGrid grid);

// v_i = I_i + E_t(visual) + E_p(i); `text_len` is only used for the
// combined-length check against max_len.
Var embed_visual(const EmbeddingTables& t, const VisualGrid& grid, size_t text_len);

// Concat(E_X(x0), E_X(x1), E_X(x1-x0), E_Y(y0), E_Y(y1), E_Y(y1-y0)) per
// box, zero-padded to d when d is not a multiple of six. Boxes must be on
// the integer 0..1000 grid.
Var embed_layout(const EmbeddingTables& t, std::span<const BBox> normalized_boxes);

struct FineInput {
  Var embeddings;                 // [L + W*H, d]
  std::vector<BBox> boxes;        // normalized, text block then visual block
  std::vector<int> positions;     // 1D indices used by the relative bias
  size_t text_len = 0;
};

// Concat(embed_text + layout(B_ft), embed_visual + layout(B_fv)) from
// precomputed patch descriptors. `normalized_boxes` holds the text block
// followed by the visual block.
Var embed_fine(const EmbeddingTables& t, std::span<const int> ids, const Tensor& descriptors,
               std::span<const BBox> normalized_boxes);

// Same composition, computing boxes, positions and descriptors from the graph.
FineInput build_fine_input(const EmbeddingTables& t, const TokenizedText& tokens, const DocumentGraph& graph);

}  // namespace mmlayout
