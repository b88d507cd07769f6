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

#include "mmlayout/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "mmlayout/error.hpp"

namespace mmlayout {
namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::vector<std::string> split_pieces(std::string_view word) {
  std::vector<std::string> out;
  std::string run;
  for (char ch : word) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      run.push_back(ch);
      continue;
    }
    if (!run.empty()) out.push_back(std::move(run));
    run.clear();
    if (!std::isspace(c)) out.emplace_back(1, ch);
  }
  if (!run.empty()) out.push_back(std::move(run));
  if (out.empty()) out.emplace_back(word);
  return out;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_.front() != kUnk) tokens_.insert(tokens_.begin(), kUnk);
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocab Vocab::build(std::span<const Page> pages, size_t max_size) {
  std::map<std::string, size_t> counts;
  for (const Page& p : pages) {
    for (const Word& w : p.words) {
      for (std::string& piece : split_pieces(w.text)) ++counts[std::move(piece)];
    }
  }
  counts.erase(kUnk);
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{kUnk};
  for (auto& [tok, n] : ranked) {
    if (tokens.size() >= max_size) break;
    tokens.push_back(tok);
  }
  return Vocab(std::move(tokens));
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write vocabulary " + path.string());
  for (const std::string& t : tokens_) out << t << "\n";
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= tokens_.size()) throw ValidationError("token id out of range");
  return tokens_[id];
}

TokenizedText tokenize(std::span<const Word> words, const Vocab& vocab, size_t max_len) {
  TokenizedText out;
  for (size_t w = 0; w < words.size(); ++w) {
    const auto pieces = split_pieces(words[w].text);
    for (size_t k = 0; k < pieces.size(); ++k) {
      out.ids.push_back(vocab.id(pieces[k]));
      out.pieces.push_back(pieces[k]);
      out.word_index.push_back(static_cast<int>(w));
      out.boxes.push_back(words[w].bbox);
      out.first_piece.push_back(k == 0);
    }
  }
  if (out.size() > max_len) {
    throw ValidationError("document has " + std::to_string(out.size()) + " tokens, more than max_len " +
                          std::to_string(max_len) + "; truncate or split the document first");
  }
  return out;
}

}  // namespace mmlayout
