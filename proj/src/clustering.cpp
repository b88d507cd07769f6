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

#include "mmlayout/clustering.hpp"

#include <algorithm>
#include <deque>

#include "mmlayout/error.hpp"

namespace mmlayout {

std::vector<int> dbscan(std::span<const BBox> boxes, const ClusterParams& params) {
  if (params.radius < 0 || params.min_pts < 0) throw ValidationError("radius and min_pts must be non-negative");
  const size_t n = boxes.size();

  // O(n^2) neighbourhoods; segment counts per page are small.
  std::vector<std::vector<int>> nbrs(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (boundary_distance(boxes[i], boxes[j]) <= params.radius) {
        nbrs[i].push_back(static_cast<int>(j));
        nbrs[j].push_back(static_cast<int>(i));
      }
    }
  }
  for (auto& v : nbrs) std::sort(v.begin(), v.end());

  std::vector<char> core(n);
  for (size_t i = 0; i < n; ++i) core[i] = static_cast<int>(nbrs[i].size()) >= params.min_pts;

  std::vector<int> label(n, kNoise);
  int next = 0;
  for (size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || label[seed] != kNoise) continue;
    std::deque<int> frontier{static_cast<int>(seed)};
    label[seed] = next;
    while (!frontier.empty()) {
      const int p = frontier.front();
      frontier.pop_front();
      for (int q : nbrs[p]) {
        if (core[q] && label[q] == kNoise) {
          label[q] = next;
          frontier.push_back(q);
        }
      }
    }
    ++next;
  }

  for (size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (int q : nbrs[i]) {
      if (core[q]) {
        label[i] = label[q];
        break;
      }
    }
  }
  return label;
}

std::vector<SalientRegion> detect_salient_regions(std::span<const Segment> segments,
                                                  const ClusterParams& params) {
  std::vector<BBox> boxes;
  boxes.reserve(segments.size());
  for (const Segment& s : segments) boxes.push_back(s.bbox);
  const std::vector<int> labels = dbscan(boxes, params);

  std::vector<SalientRegion> regions;
  std::vector<int> slot_of_cluster;
  for (size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c == kNoise) {
      regions.push_back({boxes[i], {static_cast<int>(i)}});
      continue;
    }
    if (static_cast<size_t>(c) >= slot_of_cluster.size()) slot_of_cluster.resize(c + 1, -1);
    if (slot_of_cluster[c] == -1) {
      slot_of_cluster[c] = static_cast<int>(regions.size());
      regions.push_back({boxes[i], {}});
    }
    regions[slot_of_cluster[c]].member_segment_ids.push_back(static_cast<int>(i));
  }
  for (SalientRegion& r : regions) {
    std::vector<BBox> members;
    for (int s : r.member_segment_ids) members.push_back(boxes[s]);
    r.bbox = union_box(members);
  }
  return regions;
}

}  // namespace mmlayout
