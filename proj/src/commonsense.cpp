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

#include "mmlayout/commonsense.hpp"

#include "mmlayout/error.hpp"

namespace mmlayout {
namespace {

constexpr auto kFlags = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;

const char* const kMonth =
    "(?:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|sep(?:t(?:ember)?)?|"
    "oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)";

std::string join(std::span<const char* const> words) {
  std::string out = "\\b(?:";
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += "|";
    out += words[i];
  }
  return out + ")\\b";
}

const char* const kFirstNames[] = {
    "james",  "john",   "robert", "michael", "william", "david",  "richard", "joseph", "thomas",  "charles",
    "mary",   "patricia", "jennifer", "linda", "elizabeth", "barbara", "susan", "jessica", "sarah", "karen",
    "daniel", "paul",   "mark",   "george",  "steven",  "edward", "brian",   "kevin",  "anna",    "laura",
    "helen",  "nancy",  "lisa",   "emily",   "alice",   "peter",  "frank",   "henry",  "walter",  "carol"};

const char* const kPlaces[] = {
    "united states", "usa", "u\\.s\\.a?\\.?", "canada", "mexico", "france", "germany", "italy", "spain",
    "china", "japan", "india", "brazil", "england", "britain", "united kingdom", "uk", "russia", "australia",
    "new york", "washington", "boston", "chicago", "los angeles", "san francisco", "houston", "dallas",
    "atlanta", "denver", "seattle", "miami", "philadelphia", "detroit", "london", "paris", "berlin", "tokyo",
    "beijing", "toronto", "california", "texas", "virginia", "maryland", "ohio", "florida", "georgia",
    "illinois", "michigan", "north carolina", "new jersey", "kentucky", "richmond", "winston-salem",
    "greensboro"};

const char* const kOrgSuffixes[] = {"inc\\.?", "corp\\.?", "corporation", "company", "co\\.", "llc", "ltd\\.?",
                                    "plc", "university", "institute", "association", "foundation", "bank",
                                    "group", "laboratories", "labs", "council", "committee", "agency",
                                    "department", "tobacco"};

// Patterns whose spans are blanked before CARDINAL runs.
const std::vector<std::string>& date_patterns() {
  static const std::vector<std::string> p = {
      std::string("\\b") + kMonth + "\\.?\\s+\\d{1,2}(?:st|nd|rd|th)?(?:,?\\s*\\d{4})?\\b",
      std::string("\\b\\d{1,2}\\s+") + kMonth + "\\.?(?:,?\\s*\\d{4})?\\b",
      std::string("\\b") + kMonth + "\\.?,?\\s+\\d{4}\\b",
      "\\b\\d{1,2}/\\d{1,2}/\\d{2,4}\\b",
      "\\b\\d{4}-\\d{2}-\\d{2}\\b",
      "\\b\\d{1,2}-\\d{1,2}-\\d{2,4}\\b"};
  return p;
}

const std::vector<std::string>& time_patterns() {
  static const std::vector<std::string> p = {"\\b\\d{1,2}:\\d{2}(?::\\d{2})?(?:\\s*[ap]\\.?m\\.?)?",
                                             "\\b\\d{1,2}\\s*[ap]\\.?m\\.?(?=\\W|$)", "\\b(?:noon|midnight)\\b"};
  return p;
}

const std::vector<std::string>& money_patterns() {
  static const std::vector<std::string> p = {
      "\\$\\s?\\d[\\d,]*(?:\\.\\d+)?",
      "\\b\\d[\\d,]*(?:\\.\\d+)?\\s*(?:dollars?|usd|eur|euros?|cents?)\\b"};
  return p;
}

const std::vector<std::string>& percent_patterns() {
  static const std::vector<std::string> p = {"\\b\\d+(?:\\.\\d+)?\\s*(?:%|percent\\b|per cent\\b)"};
  return p;
}

std::vector<std::regex> compile(std::span<const std::string> patterns) {
  std::vector<std::regex> out;
  for (const std::string& p : patterns) out.emplace_back(p, kFlags);
  return out;
}

const std::vector<std::regex>& mask_regexes() {
  static const std::vector<std::regex> all = [] {
    std::vector<std::regex> r;
    for (const auto* group : {&date_patterns(), &time_patterns(), &money_patterns(), &percent_patterns()}) {
      for (auto& re : compile(*group)) r.push_back(std::move(re));
    }
    return r;
  }();
  return all;
}

std::string mask_numeric_entities(std::string_view text) {
  std::string out(text);
  for (const std::regex& re : mask_regexes()) {
    for (auto it = std::sregex_iterator(out.begin(), out.end(), re); it != std::sregex_iterator(); ++it) {
      std::fill_n(out.begin() + it->position(), it->length(), ' ');
    }
  }
  return out;
}

}  // namespace

CommonSenseInventory CommonSenseInventory::standard() {
  CommonSenseInventory inv;
  const std::string person[] = {
      "\\b(?:mr|mrs|ms|dr|prof)\\.?\\s+[a-z][a-z'-]+",
      join(kFirstNames) + "\\s+(?:[a-z]\\.\\s+)?[a-z][a-z'-]+"};
  inv.add("PERSON", person);
  const std::string org[] = {"\\b[a-z][\\w&'-]*\\s+" + join(kOrgSuffixes)};
  inv.add("ORG", org);
  const std::string gpe[] = {join(kPlaces)};
  inv.add("GPE", gpe);
  inv.add("DATE", date_patterns());
  inv.add("TIME", time_patterns());
  inv.add("MONEY", money_patterns());
  inv.add("PERCENT", percent_patterns());
  const std::string cardinal[] = {"\\d"};
  inv.add("CARDINAL", cardinal);
  inv.detectors_.back().on_masked = true;
  return inv;
}

CommonSenseInventory CommonSenseInventory::first(size_t k) const {
  if (k > detectors_.size()) {
    throw ValidationError("common-sense inventory has " + std::to_string(detectors_.size()) + " detectors, " +
                          std::to_string(k) + " requested");
  }
  CommonSenseInventory out;
  out.detectors_.assign(detectors_.begin(), detectors_.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

void CommonSenseInventory::add(std::string name, std::span<const std::string> patterns) {
  try {
    detectors_.push_back({std::move(name), compile(patterns), false});
  } catch (const std::regex_error& e) {
    throw ValidationError("bad common-sense pattern: " + std::string(e.what()));
  }
}

std::vector<std::string> CommonSenseInventory::names() const {
  std::vector<std::string> out;
  for (const Detector& d : detectors_) out.push_back(d.name);
  return out;
}

std::vector<double> CommonSenseInventory::detect(std::string_view text) const {
  std::vector<double> bits(detectors_.size(), 0.0);
  if (text.empty()) return bits;
  const std::string plain(text);
  std::string masked;
  for (size_t k = 0; k < detectors_.size(); ++k) {
    const Detector& d = detectors_[k];
    if (d.on_masked && masked.empty()) masked = mask_numeric_entities(text);
    const std::string& s = d.on_masked ? masked : plain;
    for (const std::regex& re : d.patterns) {
      if (std::regex_search(s, re)) {
        bits[k] = 1.0;
        break;
      }
    }
  }
  return bits;
}

Tensor detect_segments(const CommonSenseInventory& inventory, std::span<const Segment> segments) {
  Tensor out({segments.size(), inventory.size()});
  for (size_t i = 0; i < segments.size(); ++i) {
    const std::vector<double> bits = inventory.detect(segments[i].text);
    std::copy(bits.begin(), bits.end(), out.row(i).begin());
  }
  return out;
}

CommonSenseTables CommonSenseTables::create(ParamStore& store, const ModelConfig& cfg, std::mt19937_64& rng) {
  const size_t k = static_cast<size_t>(cfg.commonsense_k);
  const size_t dc = static_cast<size_t>(cfg.commonsense_width());
  const size_t d = static_cast<size_t>(cfg.d_model);
  CommonSenseTables t;
  t.embedding = store.add("commonsense.embedding", truncated_normal({k, dc}, cfg.init_std, rng));
  Tensor proj = truncated_normal({dc, d}, cfg.init_std, rng);
  if (dc == d) {
    for (size_t i = 0; i < d; ++i) proj.at(i, i) += 1.0;
  }
  t.projection = store.add("commonsense.projection", std::move(proj));
  return t;
}

Var commonsense_embed(const Var& bits, const CommonSenseTables& tables) {
  if (bits.shape().size() != 2 || bits.cols() != tables.embedding.rows()) {
    throw ShapeError("commonsense_embed: expected [rows, " + std::to_string(tables.embedding.rows()) + "], got " +
                     shape_string(bits.shape()));
  }
  return ops::matmul(ops::matmul(bits, tables.embedding), tables.projection);
}

}  // namespace mmlayout
