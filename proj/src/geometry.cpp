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

#include "mmlayout/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmlayout/error.hpp"

namespace mmlayout {

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return inter / uni;
}

double boundary_distance(const BBox& a, const BBox& b) {
  const double dx = std::max(std::max(a.x0, b.x0) - std::min(a.x1, b.x1), 0.0);
  const double dy = std::max(std::max(a.y0, b.y0) - std::min(a.y1, b.y1), 0.0);
  return std::sqrt(dx * dx + dy * dy);
}

BBox union_box(std::span<const BBox> boxes) {
  if (boxes.empty()) throw ValidationError("empty region");
  BBox out = boxes.front();
  for (const BBox& b : boxes.subspan(1)) {
    out.x0 = std::min(out.x0, b.x0);
    out.y0 = std::min(out.y0, b.y0);
    out.x1 = std::max(out.x1, b.x1);
    out.y1 = std::max(out.y1, b.y1);
  }
  return out;
}

BBox normalize_box(const BBox& b, double page_w, double page_h) {
  if (!(page_w > 0) || !(page_h > 0)) {
    throw ValidationError("non-positive page dimension " + std::to_string(page_w) + "x" +
                          std::to_string(page_h));
  }
  auto q = [](double v, double dim) {
    const double s = std::floor(v * kLayoutGrid / dim);
    return std::clamp(s, 0.0, static_cast<double>(kLayoutGrid));
  };
  return {q(b.x0, page_w), q(b.y0, page_h), q(b.x1, page_w), q(b.y1, page_h)};
}

std::string to_string(const BBox& b) {
  std::ostringstream os;
  os << "(" << b.x0 << "," << b.y0 << "," << b.x1 << "," << b.y1 << ")";
  return os.str();
}

}  // namespace mmlayout
