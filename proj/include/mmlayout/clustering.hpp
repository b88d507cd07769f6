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
#include <vector>

#include "mmlayout/document.hpp"
#include "mmlayout/geometry.hpp"

namespace mmlayout {

struct ClusterParams {
  double radius = 30.0;  // page pixels
  int min_pts = 1;       // OTHER boxes required within radius for core status
};

inline constexpr int kNoise = -1;

// A cluster of segments treated as one coarse visual node.
struct SalientRegion {
  BBox bbox;
  std::vector<int> member_segment_ids;  // ascending
};

// DBSCAN over boundary_distance.
//
// A box is core iff at least `min_pts` other boxes lie within `radius`.
// Clusters are the connected components of the core graph, numbered in order
// of their lowest core index. A non-core box joins the cluster of the
// lowest-index core box within `radius`, otherwise it is kNoise.
std::vector<int> dbscan(std::span<const BBox> boxes, const ClusterParams& params);

// One region per cluster plus one singleton region per noise segment,
// ordered by smallest member index.
std::vector<SalientRegion> detect_salient_regions(std::span<const Segment> segments,
                                                  const ClusterParams& params);

}  // namespace mmlayout
