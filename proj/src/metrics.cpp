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

#include "mmlayout/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mmlayout/error.hpp"

namespace mmlayout {

BioTagSet::BioTagSet() : BioTagSet(std::vector<std::string>{"HEADER", "QUESTION", "ANSWER"}) {}

BioTagSet::BioTagSet(std::vector<std::string> types) : types_(std::move(types)) {
  tags_.push_back("O");
  for (const std::string& t : types_) {
    if (t.empty()) throw ValidationError("empty entity type name");
    tags_.push_back("B-" + t);
    tags_.push_back("I-" + t);
  }
  for (size_t i = 0; i < tags_.size(); ++i) {
    if (!index_.emplace(tags_[i], static_cast<int>(i)).second) throw ValidationError("duplicate tag " + tags_[i]);
  }
}

int BioTagSet::id(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) throw ValidationError("unknown tag '" + std::string(tag) + "'");
  return it->second;
}

const std::string& BioTagSet::tag(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= tags_.size()) throw ValidationError("tag id out of range");
  return tags_[id];
}

std::vector<Entity> bio_decode(std::span<const std::string> tags, bool strict) {
  std::vector<Entity> out;
  bool open = false;
  for (size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    const int pos = static_cast<int>(i);
    if (t == "O") {
      open = false;
      continue;
    }
    if (t.size() < 3 || t[1] != '-' || (t[0] != 'B' && t[0] != 'I')) {
      throw ValidationError("unknown tag '" + t + "' at position " + std::to_string(i));
    }
    const std::string type = t.substr(2);
    if (t[0] == 'I' && open && out.back().type == type) {
      out.back().end = pos + 1;
      continue;
    }
    if (t[0] == 'I' && strict) {
      open = false;
      continue;
    }
    out.push_back({type, pos, pos + 1});
    open = true;
  }
  return out;
}

std::vector<std::string> bio_encode(std::span<const Entity> entities, size_t length) {
  std::vector<std::string> tags(length, "O");
  for (const Entity& e : entities) {
    if (e.start < 0 || e.end <= e.start || static_cast<size_t>(e.end) > length) {
      throw ValidationError("entity span [" + std::to_string(e.start) + "," + std::to_string(e.end) +
                            ") outside sequence of length " + std::to_string(length));
    }
    for (int i = e.start; i < e.end; ++i) {
      if (tags[i] != "O") throw ValidationError("overlapping entities at position " + std::to_string(i));
      tags[i] = (i == e.start ? "B-" : "I-") + e.type;
    }
  }
  return tags;
}

Prf prf_from_counts(size_t tp, size_t predicted, size_t gold) {
  Prf r;
  r.true_positives = tp;
  r.predicted = predicted;
  r.gold = gold;
  if (predicted == 0 && gold == 0) {
    r.precision = r.recall = r.f1 = 1.0;
    return r;
  }
  r.precision = predicted ? static_cast<double>(tp) / predicted : 0.0;
  r.recall = gold ? static_cast<double>(tp) / gold : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

namespace {

size_t count_matches(std::span<const Entity> pred, std::span<const Entity> gold) {
  std::multiset<Entity> g(gold.begin(), gold.end());
  size_t tp = 0;
  for (const Entity& e : pred) {
    auto it = g.find(e);
    if (it != g.end()) {
      ++tp;
      g.erase(it);
    }
  }
  return tp;
}

}  // namespace

Prf entity_f1(std::span<const Entity> pred, std::span<const Entity> gold) {
  return prf_from_counts(count_matches(pred, gold), pred.size(), gold.size());
}

void F1Accumulator::add(std::span<const Entity> pred, std::span<const Entity> gold) {
  total_.tp += count_matches(pred, gold);
  total_.pred += pred.size();
  total_.gold += gold.size();
  std::map<std::string, std::pair<std::vector<Entity>, std::vector<Entity>>> split;
  for (const Entity& e : pred) split[e.type].first.push_back(e);
  for (const Entity& e : gold) split[e.type].second.push_back(e);
  for (const auto& [type, pg] : split) {
    Counts& c = by_type_[type];
    c.tp += count_matches(pg.first, pg.second);
    c.pred += pg.first.size();
    c.gold += pg.second.size();
  }
}

Prf F1Accumulator::micro() const { return prf_from_counts(total_.tp, total_.pred, total_.gold); }

std::map<std::string, Prf> F1Accumulator::per_type() const {
  std::map<std::string, Prf> out;
  for (const auto& [type, c] : by_type_) out[type] = prf_from_counts(c.tp, c.pred, c.gold);
  return out;
}

size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

double anls(std::string_view pred, std::span<const std::string> golds, double threshold) {
  if (golds.empty()) throw ValidationError("anls: empty gold answer list");
  const std::string p = lower(pred);
  double best = 0.0;
  for (const std::string& g0 : golds) {
    const std::string g = lower(g0);
    const size_t len = std::max(p.size(), g.size());
    const double s = len == 0 ? 1.0 : 1.0 - static_cast<double>(levenshtein(p, g)) / len;
    best = std::max(best, s >= threshold ? s : 0.0);
  }
  return best;
}

}  // namespace mmlayout
