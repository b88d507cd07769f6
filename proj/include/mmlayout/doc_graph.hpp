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

#include <span>
#include <string>
#include <vector>

#include "mmlayout/clustering.hpp"
#include "mmlayout/document.hpp"

namespace mmlayout {

enum class NodeKind { kFineText, kFineVisual, kCoarseText, kCoarseVisual };

struct NodeRef {
  NodeKind kind = NodeKind::kFineText;
  int index = 0;
  bool operator==(const NodeRef&) const = default;
};

struct PatchGrid {
  int cols = 7;  // W
  int rows = 7;  // H
  int count() const { return cols * rows; }
  bool operator==(const PatchGrid&) const = default;
};

// Multi-grained document graph. Fine-fine and coarse-coarse edges are
// implicit (fully connected, realized as self-attention); only the
// cross-grained parent relation is stored.
class DocumentGraph {
 public:
  DocumentGraph() = default;
  DocumentGraph(Page page, std::vector<SalientRegion> regions, PatchGrid grid, std::vector<BBox> patch_boxes,
                std::vector<int> text_parent, std::vector<int> visual_parent);

  const Page& page() const { return page_; }
  const std::vector<SalientRegion>& regions() const { return regions_; }
  const PatchGrid& grid() const { return grid_; }
  const std::vector<BBox>& patch_boxes() const { return patch_boxes_; }

  // word index -> segment index
  const std::vector<int>& text_parent() const { return text_parent_; }
  // patch index -> region index
  const std::vector<int>& visual_parent() const { return visual_parent_; }

  int count(NodeKind kind) const;
  NodeRef parent_of(NodeRef fine) const;
  const std::vector<NodeRef>& children_of(NodeRef coarse) const;

 private:
  Page page_;
  std::vector<SalientRegion> regions_;
  PatchGrid grid_;
  std::vector<BBox> patch_boxes_;
  std::vector<int> text_parent_;
  std::vector<int> visual_parent_;
  std::vector<std::vector<NodeRef>> text_children_;
  std::vector<std::vector<NodeRef>> visual_children_;
};

// Uniform W x H tiling of the page in raster (row-major) order.
std::vector<BBox> patch_boxes(double page_w, double page_h, int cols, int rows);

// Region with the largest IOU; ties go to the lowest index. When every IOU
// is zero, the region at the smallest boundary distance wins (ties again to
// the lowest index). Throws on an empty region list.
int assign_patch(const BBox& patch, std::span<const SalientRegion> regions);

DocumentGraph build_graph(const Page& page, const ClusterParams& params, PatchGrid grid);

// {"regions":[{"bbox":[...],"segments":[...]}],"patch_grid":[W,H],
//  "text_parent":[...],"visual_parent":[...]}
std::string graph_to_json(const DocumentGraph& graph, int indent = -1);
DocumentGraph graph_from_json(const Page& page, std::string_view json_text);

}  // namespace mmlayout
