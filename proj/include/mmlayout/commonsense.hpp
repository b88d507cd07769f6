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
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmlayout/autodiff.hpp"
#include "mmlayout/config.hpp"
#include "mmlayout/document.hpp"
#include "mmlayout/optim.hpp"

namespace mmlayout {

// Rule/gazetteer detectors for generic entity categories. Bit k of a
// detection vector is set iff detector k matches anywhere in the text.
//
// The numeric categories DATE, TIME, MONEY and PERCENT are matched first and
// their spans are blanked before CARDINAL runs, so "$12.50" is MONEY but not
// CARDINAL. The masking happens whether or not those categories are part of
// a truncated inventory.
class CommonSenseInventory {
 public:
  // {PERSON, ORG, GPE, DATE, TIME, MONEY, PERCENT, CARDINAL}
  static CommonSenseInventory standard();

  // The first k detectors. Throws if k exceeds size().
  CommonSenseInventory first(size_t k) const;

  // Adds a custom detector; any pattern match (ECMAScript, case-insensitive)
  // sets the bit.
  void add(std::string name, std::span<const std::string> patterns);

  size_t size() const { return detectors_.size(); }
  std::vector<std::string> names() const;

  // Multi-hot vector of length size().
  std::vector<double> detect(std::string_view text) const;

 private:
  struct Detector {
    std::string name;
    std::vector<std::regex> patterns;
    bool on_masked = false;  // runs on the text with numeric entities blanked
  };
  std::vector<Detector> detectors_;
};

// [segments, K] multi-hot matrix for a page.
Tensor detect_segments(const CommonSenseInventory& inventory, std::span<const Segment> segments);

// E_c [K, d_c] and W^C [d_c, d]. When d_c == d, W^C starts at identity plus
// truncated-normal noise.
struct CommonSenseTables {
  Var embedding;   // E_c
  Var projection;  // W^C

  static CommonSenseTables create(ParamStore& store, const ModelConfig& cfg, std::mt19937_64& rng);
};

// C' = C E_c W^C for every row of C: [rows, K] -> [rows, d].
Var commonsense_embed(const Var& bits, const CommonSenseTables& tables);

}  // namespace mmlayout
