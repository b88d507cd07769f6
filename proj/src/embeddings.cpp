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

#include "mmlayout/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmlayout/error.hpp"

namespace mmlayout {

EmbeddingTables EmbeddingTables::create(ParamStore& store, const ModelConfig& cfg, size_t vocab_size,
                                        std::mt19937_64& rng) {
  const size_t d = static_cast<size_t>(cfg.d_model);
  const size_t c = static_cast<size_t>(cfg.coord_dim());
  const double s = cfg.init_std;
  EmbeddingTables t;
  t.d_model = d;
  t.max_len = static_cast<size_t>(cfg.max_len);
  t.word = store.add("embeddings.word", truncated_normal({vocab_size, d}, s, rng));
  t.token_type = store.add("embeddings.token_type", truncated_normal({2, d}, s, rng));
  t.position = store.add("embeddings.position", truncated_normal({t.max_len, d}, s, rng));
  t.x_coord = store.add("embeddings.x", truncated_normal({kLayoutGrid + 1, c}, s, rng));
  t.y_coord = store.add("embeddings.y", truncated_normal({kLayoutGrid + 1, c}, s, rng));
  t.patch_weight = store.add("embeddings.patch_weight", truncated_normal({kPatchDescriptorWidth, d}, s, rng));
  t.patch_bias = store.add("embeddings.patch_bias", Tensor({d}), false);
  return t;
}

namespace {

Var position_rows(const EmbeddingTables& t, size_t count) {
  if (count > t.max_len) {
    throw ValidationError("position " + std::to_string(count - 1) + " exceeds max_len " + std::to_string(t.max_len));
  }
  std::vector<int> pos(count);
  std::iota(pos.begin(), pos.end(), 0);
  return ops::gather_rows(t.position, pos);
}

Var type_rows(const EmbeddingTables& t, size_t count, TokenType type) {
  std::vector<int> ids(count, type);
  return ops::gather_rows(t.token_type, ids);
}

int grid_index(double v, const char* what) {
  if (!(v >= 0 && v <= kLayoutGrid) || v != std::floor(v)) {
    throw ValidationError(std::string("layout ") + what + " " + std::to_string(v) + " is not an integer in [0,1000]");
  }
  return static_cast<int>(v);
}

}  // namespace

Var embed_text(const EmbeddingTables& t, std::span<const int> ids) {
  if (ids.empty()) return Var::constant(Tensor({0, t.d_model}));
  Var out = ops::add(ops::gather_rows(t.word, ids), type_rows(t, ids.size(), kTextToken));
  return ops::add(out, position_rows(t, ids.size()));
}

Tensor patch_descriptors(const Page& page, PatchGrid grid) {
  const std::vector<BBox> boxes = patch_boxes(page.width, page.height, grid.cols, grid.rows);
  std::shared_ptr<const Raster> image = page.image;
  if (!image && !page.image_path.empty()) image = std::make_shared<const Raster>(read_ppm(page.image_path));

  Tensor out({boxes.size(), kPatchDescriptorWidth});
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const size_t p = static_cast<size_t>(r) * grid.cols + c;
      if (image) {
        // Pixel block covered by the patch in image space.
        const int px0 = c * image->width / grid.cols;
        const int px1 = std::max(px0 + 1, (c + 1) * image->width / grid.cols);
        const int py0 = r * image->height / grid.rows;
        const int py1 = std::max(py0 + 1, (r + 1) * image->height / grid.rows);
        double sum[3] = {0, 0, 0};
        for (int y = py0; y < std::min(py1, image->height); ++y) {
          for (int x = px0; x < std::min(px1, image->width); ++x) {
            const std::uint8_t* px = image->pixel(x, y);
            for (int ch = 0; ch < 3; ++ch) sum[ch] += px[ch];
          }
        }
        const double n = static_cast<double>(std::min(py1, image->height) - py0) *
                         static_cast<double>(std::min(px1, image->width) - px0);
        for (int ch = 0; ch < 3; ++ch) out.at(p, ch) = n > 0 ? sum[ch] / n / 255.0 : 0.0;
      }
      const BBox& b = boxes[p];
      out.at(p, 3) = (b.x0 + b.x1) / 2.0 / page.width;
      out.at(p, 4) = (b.y0 + b.y1) / 2.0 / page.height;
      out.at(p, 5) = b.width() / page.width;
      out.at(p, 6) = b.height() / page.height;
    }
  }
  return out;
}

VisualGrid patch_features(const EmbeddingTables& t, const Page& page, PatchGrid grid) {
  VisualGrid v;
  v.grid = grid;
  v.boxes = patch_boxes(page.width, page.height, grid.cols, grid.rows);
  v.features = ops::linear(Var::constant(patch_descriptors(page, grid)), t.patch_weight, t.patch_bias);
  return v;
}

Var embed_visual(const EmbeddingTables& t, const VisualGrid& grid, size_t text_len) {
  const size_t n = static_cast<size_t>(grid.grid.count());
  if (n + text_len > t.max_len) {
    throw ValidationError("text (" + std::to_string(text_len) + ") plus visual (" + std::to_string(n) +
                          ") tokens exceed max_len " + std::to_string(t.max_len));
  }
  Var out = ops::add(grid.features, type_rows(t, n, kVisualToken));
  return ops::add(out, position_rows(t, n));
}

Var embed_layout(const EmbeddingTables& t, std::span<const BBox> boxes) {
  const size_t n = boxes.size();
  std::vector<int> x0(n), x1(n), w(n), y0(n), y1(n), h(n);
  for (size_t i = 0; i < n; ++i) {
    x0[i] = grid_index(boxes[i].x0, "x0");
    x1[i] = grid_index(boxes[i].x1, "x1");
    y0[i] = grid_index(boxes[i].y0, "y0");
    y1[i] = grid_index(boxes[i].y1, "y1");
    w[i] = grid_index(boxes[i].x1 - boxes[i].x0, "width");
    h[i] = grid_index(boxes[i].y1 - boxes[i].y0, "height");
  }
  std::vector<Var> parts{ops::gather_rows(t.x_coord, x0), ops::gather_rows(t.x_coord, x1),
                         ops::gather_rows(t.x_coord, w),  ops::gather_rows(t.y_coord, y0),
                         ops::gather_rows(t.y_coord, y1), ops::gather_rows(t.y_coord, h)};
  const size_t used = 6 * t.x_coord.cols();
  if (used < t.d_model) parts.push_back(Var::constant(Tensor({n, t.d_model - used})));
  return ops::concat_cols(parts);
}

Var embed_fine(const EmbeddingTables& t, std::span<const int> ids, const Tensor& descriptors,
               std::span<const BBox> boxes) {
  const size_t text_len = ids.size();
  const size_t visual_len = descriptors.rows();
  if (boxes.size() != text_len + visual_len) {
    throw ShapeError("fine input: " + std::to_string(boxes.size()) + " boxes for " + std::to_string(text_len) +
                     " text and " + std::to_string(visual_len) + " visual tokens");
  }
  VisualGrid visual;
  visual.grid = {static_cast<int>(visual_len), 1};
  visual.features = ops::linear(Var::constant(descriptors), t.patch_weight, t.patch_bias);
  Var vis = ops::add(embed_visual(t, visual, text_len), embed_layout(t, boxes.subspan(text_len)));
  if (text_len == 0) return vis;
  Var text = ops::add(embed_text(t, ids), embed_layout(t, boxes.first(text_len)));
  const Var parts[] = {text, vis};
  return ops::concat_rows(parts);
}

FineInput build_fine_input(const EmbeddingTables& t, const TokenizedText& tokens, const DocumentGraph& graph) {
  const Page& page = graph.page();
  FineInput in;
  in.text_len = tokens.size();
  for (const BBox& b : tokens.boxes) in.boxes.push_back(normalize_box(b, page.width, page.height));
  for (const BBox& b : graph.patch_boxes()) in.boxes.push_back(normalize_box(b, page.width, page.height));
  for (size_t i = 0; i < tokens.size(); ++i) in.positions.push_back(static_cast<int>(i));
  for (int i = 0; i < graph.grid().count(); ++i) in.positions.push_back(i);
  in.embeddings = embed_fine(t, tokens.ids, patch_descriptors(page, graph.grid()), in.boxes);
  return in;
}

}  // namespace mmlayout
