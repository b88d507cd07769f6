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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmlayout/document.hpp"

namespace mmlayout {

// Splits one word into pieces: maximal runs of letters/digits (bytes >= 0x80
// count as letters) and single punctuation characters. Whitespace is
// dropped. A word with no pieces yields its whole text as one piece.
std::vector<std::string> split_pieces(std::string_view word);

class Vocab {
 public:
  static constexpr const char* kUnk = "[UNK]";
  static constexpr int kUnkId = 0;

  Vocab();
  explicit Vocab(std::vector<std::string> tokens);

  // Frequency-ranked pieces (ties broken lexicographically) after [UNK],
  // truncated to max_size entries in total.
  static Vocab build(std::span<const Page> pages, size_t max_size);
  // One token per line, rank order.
  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int id(std::string_view token) const;
  const std::string& token(int id) const;
  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct TokenizedText {
  std::vector<int> ids;
  std::vector<std::string> pieces;
  std::vector<int> word_index;   // source word of each token
  std::vector<BBox> boxes;       // page coordinates, inherited from the word
  std::vector<char> first_piece; // 1 for the first token of each word

  size_t size() const { return ids.size(); }
};

// Throws ValidationError if the document produces more than max_len tokens;
// long documents must be truncated or split before tokenization.
TokenizedText tokenize(std::span<const Word> words, const Vocab& vocab, size_t max_len);

}  // namespace mmlayout
