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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmlayout/geometry.hpp"

namespace mmlayout {

struct Word {
  std::string text;
  BBox bbox;
  int segment_id = 0;
};

struct Segment {
  std::string text;
  BBox bbox;
  std::vector<int> word_ids;
};

// 8-bit RGB raster, row-major.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  const std::uint8_t* pixel(int x, int y) const { return &rgb[3 * (static_cast<size_t>(y) * width + x)]; }
};

// Binary PPM (P6, maxval 255). Throws ValidationError if unreadable.
Raster read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Raster& raster);

// One OCR'd page. Words are in reading order; segments partition the words.
struct Page {
  double width = 0;
  double height = 0;
  std::vector<Word> words;
  std::vector<Segment> segments;
  std::string image_path;                  // as written in the JSON, may be empty
  std::shared_ptr<const Raster> image;     // loaded raster, if any
  std::vector<std::string> labels;         // one BIO tag per word, or empty

  size_t num_words() const { return words.size(); }
  size_t num_segments() const { return segments.size(); }
};

// Parses and validates the document JSON interchange format. Violations
// throw ValidationError naming the offending record, e.g.
// "dangling segment_id at words[0]".
Page parse_document(std::string_view json_text);
std::string serialize_document(const Page& page, int indent = -1);

// Reads a document file; a relative image path is resolved against the
// file's directory and the raster is loaded eagerly.
Page load_document(const std::filesystem::path& path);
void save_document(const std::filesystem::path& path, const Page& page);

// Re-checks every Word/Segment/Page invariant. Throws ValidationError.
void validate(const Page& page);

}  // namespace mmlayout
