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

#include "mmlayout/clustering.hpp"
#include "mmlayout/document.hpp"

namespace mmlayout {

// SVG in page coordinates: one <rect class="segment"> per segment and one
// <rect class="region"> per salient region, each region with its own stroke
// colour. Output depends only on the inputs.
std::string render_svg(const Page& page, std::span<const SalientRegion> regions);

}  // namespace mmlayout
