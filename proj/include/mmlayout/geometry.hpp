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

namespace mmlayout {

// Axis-aligned rectangle. Page boxes are in pixels; after normalize_box the
// coordinates are integers on the 0..1000 grid.
struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool valid() const { return x0 <= x1 && y0 <= y1; }

  BBox translated(double dx, double dy) const { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }

  bool operator==(const BBox&) const = default;
};

inline constexpr int kLayoutGrid = 1000;

// Intersection over union; 0 for disjoint or zero-area pairs.
double iou(const BBox& a, const BBox& b);

// Euclidean combination of the horizontal and vertical gaps between two box
// boundaries. Zero when the boxes overlap or touch.
double boundary_distance(const BBox& a, const BBox& b);

// Smallest box covering all inputs. Throws ValidationError("empty region")
// for an empty list.
BBox union_box(std::span<const BBox> boxes);

// Maps page pixels onto the integer 0..1000 grid: floor(v * 1000 / dim),
// clamped. Throws ValidationError for a non-positive page dimension.
BBox normalize_box(const BBox& b, double page_w, double page_h);

std::string to_string(const BBox& b);

}  // namespace mmlayout
