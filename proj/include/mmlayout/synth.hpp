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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmlayout/document.hpp"

namespace mmlayout {

// Form-like pages: a header line, key/value lines ("Fax:" then
// "(202) 778-5212"), filler paragraphs and item lists. Segments are lines or
// line halves; every word carries a BIO tag over HEADER/QUESTION/ANSWER.
//
// Lines inside a block are closer than `reference_radius` and blocks are
// further apart, so each block becomes one salient region.
//
// Item lists are tagged O on the plain task. With `region_cue` set, an item
// segment is ANSWER when its salient region (detected at
// `reference_radius`) holds at least three segments and QUESTION otherwise;
// item wording carries no hint of which.
struct SynthParams {
  std::uint64_t seed = 0;
  int count = 100;
  bool region_cue = false;
  double page_width = 1000;
  double page_height = 1300;
  double reference_radius = 30;
  // Raster side length as a fraction of the page; 0 disables images.
  double image_scale = 0.1;
};

struct SynthDocument {
  Page page;
  std::map<std::string, int> tag_counts;  // entities per type, counted at emission
};

struct SynthCorpus {
  SynthParams params;
  std::vector<SynthDocument> documents;
  std::map<std::string, int> tag_counts;  // corpus totals
};

// Deterministic in (params). Throws ValidationError on invalid params.
SynthCorpus synth_generate(const SynthParams& params);

nlohmann::json to_json(const SynthParams& p);
SynthParams synth_params_from_json(const nlohmann::json& j);

// Writes doc_NNNN.json (+ doc_NNNN.ppm when images are on) and
// manifest.json {"seed","count","params","documents","tag_counts"}.
void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

// Reads every document listed in manifest.json, or every *.json file (in
// name order, manifest excluded) when no manifest exists.
std::vector<Page> load_corpus(const std::filesystem::path& dir);

}  // namespace mmlayout
