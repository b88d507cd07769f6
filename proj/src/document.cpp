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

#include "mmlayout/document.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mmlayout/error.hpp"

namespace mmlayout {
namespace {

using nlohmann::json;

std::string where(const char* array, size_t i) {
  return std::string(array) + "[" + std::to_string(i) + "]";
}

BBox parse_box(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("bbox must be [x0,y0,x1,y1] at " + ctx);
  BBox b;
  double* dst[4] = {&b.x0, &b.y0, &b.x1, &b.y1};
  for (size_t k = 0; k < 4; ++k) {
    if (!j[k].is_number()) throw ValidationError("non-numeric bbox coordinate at " + ctx);
    *dst[k] = j[k].get<double>();
    if (!std::isfinite(*dst[k])) throw ValidationError("non-finite bbox coordinate at " + ctx);
  }
  if (!b.valid()) throw ValidationError("inverted bbox " + to_string(b) + " at " + ctx);
  return b;
}

json box_json(const BBox& b) {
  auto num = [](double v) -> json {
    if (v == std::floor(v) && std::abs(v) < 1e15) return static_cast<long long>(v);
    return v;
  };
  return json::array({num(b.x0), num(b.y0), num(b.x1), num(b.y1)});
}

const json& field(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing field '" + std::string(key) + "' at " + ctx);
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& ctx) {
  const json& v = field(obj, key, ctx);
  if (!v.is_string()) throw ValidationError("field '" + std::string(key) + "' must be a string at " + ctx);
  return v.get<std::string>();
}

}  // namespace

void validate(const Page& page) {
  if (!(page.width > 0) || !(page.height > 0)) throw ValidationError("page width and height must be positive");
  const size_t nseg = page.segments.size();
  for (size_t i = 0; i < page.words.size(); ++i) {
    const Word& w = page.words[i];
    if (w.text.empty()) throw ValidationError("empty word text at " + where("words", i));
    if (!w.bbox.valid()) throw ValidationError("inverted bbox at " + where("words", i));
    if (w.segment_id < 0 || static_cast<size_t>(w.segment_id) >= nseg) {
      throw ValidationError("dangling segment_id at " + where("words", i));
    }
  }
  std::vector<int> owner(page.words.size(), -1);
  for (size_t s = 0; s < nseg; ++s) {
    const Segment& seg = page.segments[s];
    const std::string ctx = where("segments", s);
    if (seg.word_ids.empty()) throw ValidationError("empty segment at " + ctx);
    std::vector<BBox> boxes;
    for (int wid : seg.word_ids) {
      if (wid < 0 || static_cast<size_t>(wid) >= page.words.size()) {
        throw ValidationError("dangling word id " + std::to_string(wid) + " at " + ctx);
      }
      if (owner[wid] != -1) {
        throw ValidationError("word " + std::to_string(wid) + " listed twice at " + ctx);
      }
      owner[wid] = static_cast<int>(s);
      if (page.words[wid].segment_id != static_cast<int>(s)) {
        throw ValidationError("word " + std::to_string(wid) + " does not point back at " + ctx);
      }
      boxes.push_back(page.words[wid].bbox);
    }
    const BBox env = union_box(boxes);
    if (std::abs(env.x0 - seg.bbox.x0) > 1 || std::abs(env.y0 - seg.bbox.y0) > 1 ||
        std::abs(env.x1 - seg.bbox.x1) > 1 || std::abs(env.y1 - seg.bbox.y1) > 1) {
      throw ValidationError("bbox " + to_string(seg.bbox) + " is not the envelope " + to_string(env) +
                            " of its words at " + ctx);
    }
  }
  for (size_t i = 0; i < owner.size(); ++i) {
    if (owner[i] == -1) throw ValidationError("word not listed by its segment at " + where("words", i));
  }
  if (!page.labels.empty() && page.labels.size() != page.words.size()) {
    throw ValidationError("labels has " + std::to_string(page.labels.size()) + " entries for " +
                          std::to_string(page.words.size()) + " words");
  }
}

Page parse_document(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("document must be a JSON object");

  Page page;
  const json& width = field(doc, "width", "document");
  const json& height = field(doc, "height", "document");
  if (!width.is_number() || !height.is_number()) throw ValidationError("width/height must be numbers");
  page.width = width.get<double>();
  page.height = height.get<double>();
  if (auto it = doc.find("image"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("image must be a string path");
    page.image_path = it->get<std::string>();
  }

  const json& words = field(doc, "words", "document");
  const json& segments = field(doc, "segments", "document");
  if (!words.is_array() || !segments.is_array()) throw ValidationError("words and segments must be arrays");

  for (size_t i = 0; i < words.size(); ++i) {
    const std::string ctx = where("words", i);
    const json& w = words[i];
    if (!w.is_object()) throw ValidationError("expected object at " + ctx);
    Word word;
    word.text = string_field(w, "text", ctx);
    word.bbox = parse_box(field(w, "bbox", ctx), ctx);
    const json& sid = field(w, "segment_id", ctx);
    if (!sid.is_number_integer()) throw ValidationError("segment_id must be an integer at " + ctx);
    word.segment_id = sid.get<int>();
    page.words.push_back(std::move(word));
  }
  for (size_t s = 0; s < segments.size(); ++s) {
    const std::string ctx = where("segments", s);
    const json& js = segments[s];
    if (!js.is_object()) throw ValidationError("expected object at " + ctx);
    Segment seg;
    seg.text = string_field(js, "text", ctx);
    seg.bbox = parse_box(field(js, "bbox", ctx), ctx);
    const json& ids = field(js, "word_ids", ctx);
    if (!ids.is_array()) throw ValidationError("word_ids must be an array at " + ctx);
    for (const json& id : ids) {
      if (!id.is_number_integer()) throw ValidationError("word id must be an integer at " + ctx);
      seg.word_ids.push_back(id.get<int>());
    }
    page.segments.push_back(std::move(seg));
  }
  if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("labels must be an array");
    for (size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) throw ValidationError("non-string label at " + where("labels", i));
      page.labels.push_back((*it)[i].get<std::string>());
    }
  }
  validate(page);
  return page;
}

std::string serialize_document(const Page& page, int indent) {
  json doc;
  auto dim = [](double v) -> json {
    if (v == std::floor(v)) return static_cast<long long>(v);
    return v;
  };
  doc["width"] = dim(page.width);
  doc["height"] = dim(page.height);
  if (!page.image_path.empty()) doc["image"] = page.image_path;
  doc["words"] = json::array();
  for (const Word& w : page.words) {
    doc["words"].push_back({{"text", w.text}, {"bbox", box_json(w.bbox)}, {"segment_id", w.segment_id}});
  }
  doc["segments"] = json::array();
  for (const Segment& s : page.segments) {
    doc["segments"].push_back({{"text", s.text}, {"bbox", box_json(s.bbox)}, {"word_ids", s.word_ids}});
  }
  if (!page.labels.empty()) doc["labels"] = page.labels;
  return doc.dump(indent);
}

Page load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open document " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Page page;
  try {
    page = parse_document(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!page.image_path.empty()) {
    std::filesystem::path img = page.image_path;
    if (img.is_relative()) img = path.parent_path() / img;
    page.image = std::make_shared<const Raster>(read_ppm(img));
  }
  return page;
}

void save_document(const std::filesystem::path& path, const Page& page) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write document " + path.string());
  out << serialize_document(page, 1) << "\n";
}

Raster read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("unreadable image file " + path.string());
  auto token = [&in]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  Raster r;
  try {
    if (token() != "P6") throw ValidationError("not a binary PPM (P6): " + path.string());
    r.width = std::stoi(token());
    r.height = std::stoi(token());
    if (std::stoi(token()) != 255) throw ValidationError("PPM maxval must be 255: " + path.string());
  } catch (const std::logic_error&) {
    throw ValidationError("malformed PPM header: " + path.string());
  }
  if (r.width <= 0 || r.height <= 0) throw ValidationError("empty image: " + path.string());
  r.rgb.resize(static_cast<size_t>(r.width) * r.height * 3);
  in.read(reinterpret_cast<char*>(r.rgb.data()), static_cast<std::streamsize>(r.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(r.rgb.size())) {
    throw ValidationError("truncated image data: " + path.string());
  }
  return r;
}

void write_ppm(const std::filesystem::path& path, const Raster& raster) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write image " + path.string());
  out << "P6\n" << raster.width << " " << raster.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(raster.rgb.data()), static_cast<std::streamsize>(raster.rgb.size()));
}

}  // namespace mmlayout
