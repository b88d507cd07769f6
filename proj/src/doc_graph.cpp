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

#include "mmlayout/doc_graph.hpp"

#include <cmath>

#include <json.hpp>

#include "mmlayout/error.hpp"

namespace mmlayout {

DocumentGraph::DocumentGraph(Page page, std::vector<SalientRegion> regions, PatchGrid grid,
                             std::vector<BBox> patch_boxes, std::vector<int> text_parent,
                             std::vector<int> visual_parent)
    : page_(std::move(page)),
      regions_(std::move(regions)),
      grid_(grid),
      patch_boxes_(std::move(patch_boxes)),
      text_parent_(std::move(text_parent)),
      visual_parent_(std::move(visual_parent)) {
  if (text_parent_.size() != page_.words.size()) throw ValidationError("text_parent must cover every word");
  if (static_cast<int>(visual_parent_.size()) != grid_.count() ||
      static_cast<int>(patch_boxes_.size()) != grid_.count()) {
    throw ValidationError("visual_parent must cover every patch");
  }
  text_children_.resize(page_.segments.size());
  visual_children_.resize(regions_.size());
  for (size_t i = 0; i < text_parent_.size(); ++i) {
    const int p = text_parent_[i];
    if (p < 0 || static_cast<size_t>(p) >= text_children_.size()) {
      throw ValidationError("text_parent[" + std::to_string(i) + "] out of range");
    }
    text_children_[p].push_back({NodeKind::kFineText, static_cast<int>(i)});
  }
  for (size_t i = 0; i < visual_parent_.size(); ++i) {
    const int p = visual_parent_[i];
    if (p < 0 || static_cast<size_t>(p) >= visual_children_.size()) {
      throw ValidationError("visual_parent[" + std::to_string(i) + "] out of range");
    }
    visual_children_[p].push_back({NodeKind::kFineVisual, static_cast<int>(i)});
  }
}

int DocumentGraph::count(NodeKind kind) const {
  switch (kind) {
    case NodeKind::kFineText: return static_cast<int>(text_parent_.size());
    case NodeKind::kFineVisual: return static_cast<int>(visual_parent_.size());
    case NodeKind::kCoarseText: return static_cast<int>(page_.segments.size());
    case NodeKind::kCoarseVisual: return static_cast<int>(regions_.size());
  }
  return 0;
}

NodeRef DocumentGraph::parent_of(NodeRef fine) const {
  if (fine.index < 0 || fine.index >= count(fine.kind)) throw ValidationError("node index out of range");
  switch (fine.kind) {
    case NodeKind::kFineText: return {NodeKind::kCoarseText, text_parent_[fine.index]};
    case NodeKind::kFineVisual: return {NodeKind::kCoarseVisual, visual_parent_[fine.index]};
    default: throw ValidationError("coarse nodes have no parent");
  }
}

const std::vector<NodeRef>& DocumentGraph::children_of(NodeRef coarse) const {
  if (coarse.index < 0 || coarse.index >= count(coarse.kind)) throw ValidationError("node index out of range");
  switch (coarse.kind) {
    case NodeKind::kCoarseText: return text_children_[coarse.index];
    case NodeKind::kCoarseVisual: return visual_children_[coarse.index];
    default: throw ValidationError("fine nodes have no children");
  }
}

std::vector<BBox> patch_boxes(double page_w, double page_h, int cols, int rows) {
  if (cols < 1 || rows < 1) throw ValidationError("patch grid must be at least 1x1");
  std::vector<BBox> out;
  out.reserve(static_cast<size_t>(cols) * rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.push_back({page_w * c / cols, page_h * r / rows, page_w * (c + 1) / cols, page_h * (r + 1) / rows});
    }
  }
  return out;
}

int assign_patch(const BBox& patch, std::span<const SalientRegion> regions) {
  if (regions.empty()) throw ValidationError("no regions for patch assignment");
  int best = -1;
  double best_iou = 0.0;
  for (size_t i = 0; i < regions.size(); ++i) {
    const double v = iou(patch, regions[i].bbox);
    if (v > best_iou) {
      best_iou = v;
      best = static_cast<int>(i);
    }
  }
  if (best >= 0) return best;
  best = 0;
  double best_dist = boundary_distance(patch, regions[0].bbox);
  for (size_t i = 1; i < regions.size(); ++i) {
    const double d = boundary_distance(patch, regions[i].bbox);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

DocumentGraph build_graph(const Page& page, const ClusterParams& params, PatchGrid grid) {
  std::vector<SalientRegion> regions = detect_salient_regions(page.segments, params);
  std::vector<BBox> patches = patch_boxes(page.width, page.height, grid.cols, grid.rows);
  std::vector<int> text_parent;
  text_parent.reserve(page.words.size());
  for (const Word& w : page.words) text_parent.push_back(w.segment_id);
  std::vector<int> visual_parent;
  visual_parent.reserve(patches.size());
  for (const BBox& p : patches) visual_parent.push_back(assign_patch(p, regions));
  return DocumentGraph(page, std::move(regions), grid, std::move(patches), std::move(text_parent),
                       std::move(visual_parent));
}

std::string graph_to_json(const DocumentGraph& graph, int indent) {
  using nlohmann::json;
  auto num = [](double v) -> json {
    if (v == std::floor(v)) return static_cast<long long>(v);
    return v;
  };
  json j;
  j["regions"] = json::array();
  for (const SalientRegion& r : graph.regions()) {
    const BBox& b = r.bbox;
    j["regions"].push_back(
        {{"bbox", json::array({num(b.x0), num(b.y0), num(b.x1), num(b.y1)})}, {"segments", r.member_segment_ids}});
  }
  j["patch_grid"] = {graph.grid().cols, graph.grid().rows};
  j["text_parent"] = graph.text_parent();
  j["visual_parent"] = graph.visual_parent();
  return j.dump(indent);
}

DocumentGraph graph_from_json(const Page& page, std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
    std::vector<SalientRegion> regions;
    for (const json& r : j.at("regions")) {
      const auto b = r.at("bbox").get<std::vector<double>>();
      if (b.size() != 4) throw ValidationError("region bbox must have 4 coordinates");
      regions.push_back({{b[0], b[1], b[2], b[3]}, r.at("segments").get<std::vector<int>>()});
    }
    const auto g = j.at("patch_grid").get<std::vector<int>>();
    if (g.size() != 2) throw ValidationError("patch_grid must be [W,H]");
    PatchGrid grid{g[0], g[1]};
    return DocumentGraph(page, std::move(regions), grid, patch_boxes(page.width, page.height, grid.cols, grid.rows),
                         j.at("text_parent").get<std::vector<int>>(), j.at("visual_parent").get<std::vector<int>>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace mmlayout
