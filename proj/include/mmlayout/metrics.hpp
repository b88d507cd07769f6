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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmlayout {

// O plus B-/I- for every entity type. Ids: O = 0, then B-t, I-t per type in
// declaration order.
class BioTagSet {
 public:
  BioTagSet();
  explicit BioTagSet(std::vector<std::string> types);

  size_t size() const { return tags_.size(); }
  const std::vector<std::string>& types() const { return types_; }
  const std::vector<std::string>& tags() const { return tags_; }
  // Throws ValidationError for tags outside the set.
  int id(std::string_view tag) const;
  const std::string& tag(int id) const;

 private:
  std::vector<std::string> types_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, int> index_;
};

struct Entity {
  std::string type;
  int start = 0;  // inclusive
  int end = 0;    // exclusive

  auto operator<=>(const Entity&) const = default;
};

// Lenient mode: an I- tag whose type differs from the open entity (or with
// nothing open) starts a new entity. Strict mode drops such tags as O.
// Throws ValidationError on anything other than O, B-x or I-x.
std::vector<Entity> bio_decode(std::span<const std::string> tags, bool strict = false);
std::vector<std::string> bio_encode(std::span<const Entity> entities, size_t length);

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  size_t true_positives = 0;
  size_t predicted = 0;
  size_t gold = 0;
};

// Exact (type, start, end) matching. Both sides empty gives 1.0 everywhere.
Prf entity_f1(std::span<const Entity> pred, std::span<const Entity> gold);
Prf prf_from_counts(size_t tp, size_t predicted, size_t gold);

// Micro-averaged counts over a corpus, overall and per entity type.
class F1Accumulator {
 public:
  void add(std::span<const Entity> pred, std::span<const Entity> gold);
  Prf micro() const;
  std::map<std::string, Prf> per_type() const;

 private:
  struct Counts {
    size_t tp = 0, pred = 0, gold = 0;
  };
  Counts total_;
  std::map<std::string, Counts> by_type_;
};

size_t levenshtein(std::string_view a, std::string_view b);

// max over golds of 1 - lev/max_len (case-folded), zeroed below threshold.
// Throws ValidationError on an empty gold list.
double anls(std::string_view pred, std::span<const std::string> golds, double threshold = 0.5);

}  // namespace mmlayout
