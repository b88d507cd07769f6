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

#include "mmlayout/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mmlayout/clustering.hpp"
#include "mmlayout/error.hpp"

namespace mmlayout {
namespace {

constexpr double kCharWidth = 10;
constexpr double kLineHeight = 20;
constexpr double kMarginX = 60;

const std::vector<std::string> kHeaderWords = {
    "APPLICATION", "FORM",    "REPORT",  "CONFIDENTIAL", "REQUEST", "SUMMARY",  "ORDER",     "RECORD",
    "MEMORANDUM",  "INVOICE", "DATA",    "SHEET",        "PROJECT", "REVIEW",   "SUBMISSION", "TRANSMITTAL",
    "RESEARCH",    "MARKET",  "PRODUCT", "COVER",        "BUDGET",  "PROPOSAL", "ANALYSIS",  "STATEMENT"};

const std::vector<std::string> kFillerWords = {
    "the",    "of",      "and",     "to",       "in",     "for",     "is",     "on",      "that",   "by",
    "this",   "with",    "are",     "be",       "as",     "at",      "from",   "or",      "an",     "will",
    "please", "review",  "attached", "results", "study",  "program", "sample", "following", "should", "may",
    "were",   "which",   "been",    "all",      "new",    "product", "test",   "further", "details", "note"};

const std::vector<std::string> kItemWords = {
    "Carton", "Pack",  "Box",    "Filter",  "Menthol", "Light",  "King",    "Regular", "Sample", "Lot",
    "Unit",   "Case",  "Item",   "Display", "Tray",    "Bundle", "Premium", "Ultra",   "Blend",  "Series",
    "Type",   "Grade", "Model",  "Kit",     "Panel",   "Batch",  "Carrier", "Label",   "Insert", "Wrap"};

const std::vector<std::string> kFirst = {"John", "Mary", "Robert", "Linda", "James", "Susan",
                                         "David", "Karen", "Peter", "Helen", "Frank", "Alice"};
const std::vector<std::string> kLast = {"Smith", "Johnson", "Brown", "Miller", "Davis", "Wilson",
                                        "Moore", "Taylor", "Clark", "Lewis", "Walker", "Hall"};
const std::vector<std::string> kOrgStem = {"Lorillard", "Acme", "Philip", "Brown", "Liggett", "Reynolds",
                                           "Hudson", "Summit", "Atlas", "Keystone"};
const std::vector<std::string> kOrgTail = {"Tobacco Company", "Inc.", "Corporation", "Research Institute",
                                           "Group", "Laboratories"};
const std::vector<std::string> kCities = {"New York", "Richmond", "Greensboro", "Chicago", "Boston",
                                          "Atlanta", "Denver", "Winston-Salem", "Washington", "Louisville"};
const std::vector<std::string> kMonths = {"January", "February", "March", "April", "May", "June", "July",
                                          "August", "September", "October", "November", "December"};

enum class ValueKind { kName, kOrg, kPhone, kDate, kMoney, kCity, kCode, kCount, kPercent, kTime };

struct KeyKind {
  const char* text;
  ValueKind value;
};

const std::vector<KeyKind> kKeys = {
    {"Name", ValueKind::kName},        {"To", ValueKind::kName},          {"From", ValueKind::kName},
    {"Attention", ValueKind::kName},   {"Company", ValueKind::kOrg},      {"Client", ValueKind::kOrg},
    {"Fax", ValueKind::kPhone},        {"Phone", ValueKind::kPhone},      {"Phone Number", ValueKind::kPhone},
    {"Date", ValueKind::kDate},        {"Due Date", ValueKind::kDate},    {"Amount", ValueKind::kMoney},
    {"Total Cost", ValueKind::kMoney}, {"City", ValueKind::kCity},        {"Location", ValueKind::kCity},
    {"Code", ValueKind::kCode},        {"Reference No", ValueKind::kCode}, {"Pages", ValueKind::kCount},
    {"Quantity", ValueKind::kCount},   {"Share", ValueKind::kPercent},    {"Time", ValueKind::kTime}};

class Builder {
 public:
  explicit Builder(std::mt19937_64& rng) : rng_(rng) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }

  std::string value(ValueKind kind) {
    char buf[64];
    switch (kind) {
      case ValueKind::kName:
        return pick(kFirst) + " " + pick(kLast);
      case ValueKind::kOrg:
        return pick(kOrgStem) + " " + pick(kOrgTail);
      case ValueKind::kPhone:
        std::snprintf(buf, sizeof(buf), "(%03d) %03d-%04d", uniform(201, 989), uniform(200, 999), uniform(0, 9999));
        return buf;
      case ValueKind::kDate:
        if (uniform(0, 1)) return pick(kMonths) + " " + std::to_string(uniform(1, 28)) + ", " + std::to_string(uniform(1975, 1999));
        std::snprintf(buf, sizeof(buf), "%02d/%02d/%02d", uniform(1, 12), uniform(1, 28), uniform(75, 99));
        return buf;
      case ValueKind::kMoney:
        std::snprintf(buf, sizeof(buf), "$%d.%02d", uniform(1, 9999), uniform(0, 99));
        return buf;
      case ValueKind::kCity:
        return pick(kCities);
      case ValueKind::kCode:
        std::snprintf(buf, sizeof(buf), "%c%c-%04d", 'A' + uniform(0, 25), 'A' + uniform(0, 25), uniform(0, 9999));
        return buf;
      case ValueKind::kCount:
        return std::to_string(uniform(1, 500));
      case ValueKind::kPercent:
        return std::to_string(uniform(1, 99)) + "%";
      case ValueKind::kTime:
        std::snprintf(buf, sizeof(buf), "%d:%02d %s", uniform(1, 12), uniform(0, 59), uniform(0, 1) ? "PM" : "AM");
        return buf;
    }
    return {};
  }

  // Appends one segment made of `text`'s space-separated words starting at
  // (x, y), all tagged with `type` (empty for O). Returns the right edge.
  double segment(const std::string& text, double x, double y, const std::string& type) {
    std::istringstream in(text);
    std::string w;
    Segment seg;
    seg.text = text;
    const int sid = static_cast<int>(page.segments.size());
    bool first = true;
    double cursor = x;
    while (in >> w) {
      const double width = kCharWidth * static_cast<double>(w.size());
      page.words.push_back({w, {cursor, y, cursor + width, y + kLineHeight}, sid});
      seg.word_ids.push_back(static_cast<int>(page.words.size()) - 1);
      page.labels.push_back(type.empty() ? "O" : (first ? "B-" : "I-") + type);
      first = false;
      cursor += width + kCharWidth;
    }
    if (!type.empty() && !seg.word_ids.empty()) ++entities[type];
    std::vector<BBox> boxes;
    for (int id : seg.word_ids) boxes.push_back(page.words[id].bbox);
    seg.bbox = union_box(boxes);
    page.segments.push_back(std::move(seg));
    return cursor - kCharWidth;
  }

  std::string words(const std::vector<std::string>& lexicon, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) out += (i ? " " : "") + pick(lexicon);
    return out;
  }

  Page page;
  std::vector<int> item_segments;
  std::map<std::string, int> entities;  // counted as segments are emitted

 private:
  std::mt19937_64& rng_;
};

SynthDocument generate_one(const SynthParams& p, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(p.seed), static_cast<std::uint32_t>(p.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  Builder b(rng);
  b.page.width = p.page_width;
  b.page.height = p.page_height;
  const double bottom = p.page_height - 40;

  // Header line, roughly centred.
  double y = 40 + b.uniform(0, 20);
  {
    const std::string text = b.words(kHeaderWords, b.uniform(2, 4));
    const double width = kCharWidth * static_cast<double>(text.size());
    b.segment(text, std::max(kMarginX, (p.page_width - width) / 2 + b.uniform(-40, 40)), y, "HEADER");
    y += kLineHeight;
  }

  const int blocks = b.uniform(3, 5);
  for (int blk = 0; blk < blocks; ++blk) {
    const int gap = b.uniform(40, 64);
    if (y + gap + kLineHeight > bottom) break;
    y += gap;
    const int roll = b.uniform(0, 9);
    if (roll < 4) {
      // Key/value lines: "Key:" then the value 20px to the right.
      const int lines = b.uniform(1, 3);
      for (int l = 0; l < lines && y + kLineHeight <= bottom; ++l) {
        const KeyKind& key = b.pick(kKeys);
        const double x = kMarginX + b.uniform(0, 40);
        const double end = b.segment(std::string(key.text) + ":", x, y, "QUESTION");
        b.segment(b.value(key.value), end + 20 + b.uniform(0, 10), y, "ANSWER");
        y += kLineHeight + (l + 1 < lines ? 10 : 0);
      }
    } else if (roll < 6) {
      const int lines = b.uniform(1, 2);
      for (int l = 0; l < lines && y + kLineHeight <= bottom; ++l) {
        b.segment(b.words(kFillerWords, b.uniform(4, 7)), kMarginX, y, "");
        y += kLineHeight + (l + 1 < lines ? 10 : 0);
      }
    } else {
      // Item list; several sub-blocks whose spacing alone decides grouping.
      const int groups = b.uniform(1, 3);
      for (int g = 0; g < groups; ++g) {
        if (g > 0) {
          const int between = b.uniform(static_cast<int>(p.reference_radius) + 4, static_cast<int>(p.reference_radius) + 24);
          if (y + between + kLineHeight > bottom) break;
          y += between;
        }
        const int lines = b.uniform(1, 4);
        const int within = b.uniform(4, static_cast<int>(p.reference_radius) - 4);
        const double x = kMarginX + b.uniform(0, 60);
        for (int l = 0; l < lines && y + kLineHeight <= bottom; ++l) {
          b.item_segments.push_back(static_cast<int>(b.page.segments.size()));
          b.segment(b.words(kItemWords, b.uniform(1, 3)), x, y, "");
          y += kLineHeight + (l + 1 < lines ? within : 0);
        }
      }
    }
  }

  if (p.region_cue && !b.item_segments.empty()) {
    const auto regions = detect_salient_regions(b.page.segments, {p.reference_radius, 1});
    std::vector<size_t> region_size(b.page.segments.size(), 0);
    for (const SalientRegion& r : regions) {
      for (int s : r.member_segment_ids) region_size[s] = r.member_segment_ids.size();
    }
    for (int s : b.item_segments) {
      const std::string type = region_size[s] >= 3 ? "ANSWER" : "QUESTION";
      ++b.entities[type];
      const auto& ids = b.page.segments[s].word_ids;
      for (size_t k = 0; k < ids.size(); ++k) b.page.labels[ids[k]] = (k == 0 ? "B-" : "I-") + type;
    }
  }

  if (p.image_scale > 0) {
    auto raster = std::make_shared<Raster>();
    raster->width = std::max(1, static_cast<int>(p.page_width * p.image_scale));
    raster->height = std::max(1, static_cast<int>(p.page_height * p.image_scale));
    raster->rgb.assign(static_cast<size_t>(raster->width) * raster->height * 3, 255);
    for (const Word& w : b.page.words) {
      const int x0 = static_cast<int>(w.bbox.x0 * p.image_scale), x1 = static_cast<int>(w.bbox.x1 * p.image_scale);
      const int y0 = static_cast<int>(w.bbox.y0 * p.image_scale), y1 = static_cast<int>(w.bbox.y1 * p.image_scale);
      for (int yy = y0; yy < std::min(y1 + 1, raster->height); ++yy) {
        for (int xx = x0; xx < std::min(x1 + 1, raster->width); ++xx) {
          std::uint8_t* px = &raster->rgb[3 * (static_cast<size_t>(yy) * raster->width + xx)];
          px[0] = px[1] = px[2] = 40;
        }
      }
    }
    b.page.image = raster;
    char name[32];
    std::snprintf(name, sizeof(name), "doc_%04llu.ppm", static_cast<unsigned long long>(index));
    b.page.image_path = name;
  }

  validate(b.page);
  SynthDocument doc;
  doc.tag_counts = std::move(b.entities);
  doc.page = std::move(b.page);
  return doc;
}

}  // namespace

SynthCorpus synth_generate(const SynthParams& params) {
  if (params.count < 1) throw ValidationError("synth: count must be at least 1");
  if (!(params.page_width >= 400) || !(params.page_height >= 400)) {
    throw ValidationError("synth: page must be at least 400x400");
  }
  if (!(params.reference_radius >= 10)) throw ValidationError("synth: reference_radius must be at least 10");
  if (params.image_scale < 0 || params.image_scale > 1) throw ValidationError("synth: image_scale must be in [0,1]");
  SynthCorpus corpus;
  corpus.params = params;
  for (int i = 0; i < params.count; ++i) {
    corpus.documents.push_back(generate_one(params, static_cast<std::uint64_t>(i)));
    for (const auto& [tag, n] : corpus.documents.back().tag_counts) corpus.tag_counts[tag] += n;
  }
  return corpus;
}

nlohmann::json to_json(const SynthParams& p) {
  return {{"seed", p.seed},
          {"count", p.count},
          {"region_cue", p.region_cue},
          {"page_width", p.page_width},
          {"page_height", p.page_height},
          {"reference_radius", p.reference_radius},
          {"image_scale", p.image_scale}};
}

SynthParams synth_params_from_json(const nlohmann::json& j) {
  SynthParams p;
  if (!j.is_object()) throw ValidationError("synth params must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") p.seed = v.get<std::uint64_t>();
    else if (key == "count") p.count = v.get<int>();
    else if (key == "region_cue") p.region_cue = v.get<bool>();
    else if (key == "page_width") p.page_width = v.get<double>();
    else if (key == "page_height") p.page_height = v.get<double>();
    else if (key == "reference_radius") p.reference_radius = v.get<double>();
    else if (key == "image_scale") p.image_scale = v.get<double>();
    else throw ValidationError("unknown synth parameter '" + key + "'");
  }
  return p;
}

void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["seed"] = corpus.params.seed;
  manifest["count"] = corpus.params.count;
  manifest["params"] = to_json(corpus.params);
  manifest["documents"] = nlohmann::json::array();
  manifest["tag_counts"] = corpus.tag_counts;
  for (size_t i = 0; i < corpus.documents.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "doc_%04zu.json", i);
    const Page& page = corpus.documents[i].page;
    if (page.image) write_ppm(dir / page.image_path, *page.image);
    save_document(dir / name, page);
    manifest["documents"].push_back(name);
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
}

std::vector<Page> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("corpus directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("malformed manifest.json: " + std::string(e.what()));
    }
    if (!m.contains("documents") || !m["documents"].is_array()) {
      throw ValidationError("manifest.json has no 'documents' array");
    }
    for (const auto& d : m["documents"]) files.push_back(dir / d.get<std::string>());
  } else {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw ValidationError("corpus " + dir.string() + " has no documents");
  std::vector<Page> pages;
  for (const auto& f : files) pages.push_back(load_document(f));
  return pages;
}

}  // namespace mmlayout
