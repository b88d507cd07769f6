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


#include <doctest.h>

#include <filesystem>
#include <memory>
#include <random>
#include <vector>

#include "mmlayout/embeddings.hpp"
#include "mmlayout/error.hpp"
#include "mmlayout/tokenizer.hpp"
#include "reference.hpp"

using namespace mmlayout;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.d_model = 12;
  cfg.heads = 2;
  cfg.max_len = 16;
  cfg.init_std = 0.5;
  return cfg;
}

struct Tables {
  ParamStore store;
  EmbeddingTables t;
  explicit Tables(size_t vocab = 10, ModelConfig cfg = small_config()) {
    std::mt19937_64 rng(3);
    t = EmbeddingTables::create(store, cfg, vocab, rng);
  }
  void zero() {
    for (auto& e : store.entries()) e.var.mutable_value().fill(0.0);
  }
};

Page two_word_page() {
  return parse_document(R"({"width":200,"height":100,
    "words":[{"text":"Fax:","bbox":[10,10,50,30],"segment_id":0},{"text":"555","bbox":[60,10,90,30],"segment_id":0}],
    "segments":[{"text":"Fax: 555","bbox":[10,10,90,30],"word_ids":[0,1]}]})");
}

}  // namespace

TEST_CASE("word pieces") {
  CHECK(split_pieces("fax:") == std::vector<std::string>{"fax", ":"});
  CHECK(split_pieces("(202)") == std::vector<std::string>{"(", "202", ")"});
  CHECK(split_pieces("$12.50") == std::vector<std::string>{"$", "12", ".", "50"});
  CHECK(split_pieces("caf\xc3\xa9") == std::vector<std::string>{"caf\xc3\xa9"});
}

TEST_CASE("tokenize keeps word boxes and marks first pieces") {
  const Vocab vocab(std::vector<std::string>{"fax", ":", "123"});
  const std::vector<Word> words{{"fax:", {0, 0, 30, 10}, 0}, {"123", {35, 0, 60, 10}, 1}};
  const TokenizedText t = tokenize(words, vocab, 8);
  CHECK(t.pieces == std::vector<std::string>{"fax", ":", "123"});
  CHECK(t.word_index == std::vector<int>{0, 0, 1});
  CHECK(t.first_piece == std::vector<char>{1, 0, 1});
  CHECK(t.boxes[1] == words[0].bbox);
  CHECK(t.boxes[2] == words[1].bbox);
  for (size_t i = 0; i < t.size(); ++i) CHECK(vocab.id(vocab.token(t.ids[i])) == t.ids[i]);

  const std::vector<Word> odd{{"\xe2\x98\x83", {0, 0, 1, 1}, 0}};
  CHECK(tokenize(odd, vocab, 8).ids == std::vector<int>{Vocab::kUnkId});
  CHECK_THROWS_AS(tokenize(words, vocab, 2), ValidationError);
}

TEST_CASE("vocabulary build, save and load") {
  const Page page = two_word_page();
  const std::vector<Page> pages{page, page};
  const Vocab v = Vocab::build(pages, 3);
  CHECK(v.size() == 3);
  CHECK(v.token(0) == Vocab::kUnk);
  const auto path = std::filesystem::temp_directory_path() / "mmlayout_vocab.txt";
  v.save(path);
  CHECK(Vocab::load(path) == v);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(Vocab(std::vector<std::string>{"a", "a"}), ValidationError);
}

TEST_CASE("text embedding is a sum of three rows") {
  Tables tb;
  const int ids[] = {4, 4};
  const Tensor out = embed_text(tb.t, ids).value();
  const auto word = ref::to_mat(tb.t.word.value());
  const auto type = ref::to_mat(tb.t.token_type.value());
  const auto pos = ref::to_mat(tb.t.position.value());
  for (size_t c = 0; c < 12; ++c) {
    CHECK(out.at(0, c) == word[4][c] + type[0][c] + pos[0][c]);
    CHECK(std::abs((out.at(0, c) - out.at(1, c)) - (pos[0][c] - pos[1][c])) < 1e-15);
  }
  const int too_many[17] = {};
  CHECK_THROWS_AS(embed_text(tb.t, too_many), ValidationError);
  tb.zero();
  const Tensor zero = embed_text(tb.t, ids).value();
  for (size_t i = 0; i < zero.size(); ++i) CHECK(zero[i] == 0.0);
}

TEST_CASE("layout embedding slices") {
  Tables tb;
  const auto ex = ref::to_mat(tb.t.x_coord.value());
  const auto ey = ref::to_mat(tb.t.y_coord.value());
  const std::vector<BBox> boxes{{0, 0, 0, 0}, {10, 20, 110, 70}, {10, 20, 110, 70}};
  const Tensor out = embed_layout(tb.t, boxes).value();
  REQUIRE(out.cols() == 12);
  // d = 12 gives two columns per slice and no padding
  for (size_t k = 0; k < 2; ++k) {
    for (size_t s = 0; s < 3; ++s) CHECK(out.at(0, 2 * s + k) == ex[0][k]);
    for (size_t s = 3; s < 6; ++s) CHECK(out.at(0, 2 * s + k) == ey[0][k]);
    CHECK(out.at(1, 0 + k) == ex[10][k]);
    CHECK(out.at(1, 2 + k) == ex[110][k]);
    CHECK(out.at(1, 4 + k) == ex[100][k]);
    CHECK(out.at(1, 6 + k) == ey[20][k]);
    CHECK(out.at(1, 8 + k) == ey[70][k]);
    CHECK(out.at(1, 10 + k) == ey[50][k]);
  }
  for (size_t c = 0; c < 12; ++c) CHECK(out.at(1, c) == out.at(2, c));

  const std::vector<BBox> outside{{0, 0, 1001, 5}};
  CHECK_THROWS_AS(embed_layout(tb.t, outside), ValidationError);
  const std::vector<BBox> fractional{{0.5, 0, 10, 5}};
  CHECK_THROWS_AS(embed_layout(tb.t, fractional), ValidationError);
}

TEST_CASE("layout embedding pads when d is not a multiple of six") {
  ModelConfig cfg = small_config();
  cfg.d_model = 16;
  Tables tb(10, cfg);
  const std::vector<BBox> boxes{{1, 2, 3, 4}};
  const Tensor out = embed_layout(tb.t, boxes).value();
  REQUIRE(out.cols() == 16);
  CHECK(out.at(0, 12) == 0.0);
  CHECK(out.at(0, 15) == 0.0);
  CHECK(out.at(0, 0) == tb.t.x_coord.value().at(1, 0));
}

TEST_CASE("patch descriptors without an image") {
  Page page = two_word_page();
  const Tensor d = patch_descriptors(page, {2, 1});
  REQUIRE(d.rows() == 2);
  const double expect0[] = {0, 0, 0, 0.25, 0.5, 0.5, 1.0};
  const double expect1[] = {0, 0, 0, 0.75, 0.5, 0.5, 1.0};
  for (size_t k = 0; k < 7; ++k) {
    CHECK(d.at(0, k) == expect0[k]);
    CHECK(d.at(1, k) == expect1[k]);
  }
  page.image_path = "/nonexistent/page.ppm";
  CHECK_THROWS_AS(patch_descriptors(page, {2, 1}), ValidationError);
}

TEST_CASE("patch descriptors match a pixel loop") {
  auto raster = std::make_shared<Raster>();
  raster->width = 6;
  raster->height = 4;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      const bool dark = (x + y) % 2 == 0;
      raster->rgb.push_back(dark ? 10 : 250);
      raster->rgb.push_back(static_cast<std::uint8_t>(x * 40));
      raster->rgb.push_back(static_cast<std::uint8_t>(y * 60));
    }
  Page page = two_word_page();
  page.image = raster;
  const PatchGrid grid{3, 2};
  const Tensor d = patch_descriptors(page, grid);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      double sum[3] = {0, 0, 0};
      for (int y = r * 2; y < r * 2 + 2; ++y)
        for (int x = c * 2; x < c * 2 + 2; ++x)
          for (int ch = 0; ch < 3; ++ch) sum[ch] += raster->rgb[3 * (y * 6 + x) + ch];
      for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(d.at(r * 3 + c, ch) - sum[ch] / 4 / 255) < 1e-12);
    }

  // uniform white: identical colour columns everywhere
  for (auto& v : raster->rgb) v = 255;
  const Tensor w = patch_descriptors(page, grid);
  for (size_t p = 0; p < 6; ++p)
    for (size_t ch = 0; ch < 3; ++ch) CHECK(w.at(p, ch) == 1.0);
}

TEST_CASE("visual embedding shares tables with the text path") {
  Tables tb;
  const Page page = two_word_page();
  const VisualGrid grid = patch_features(tb.t, page, {2, 2});
  const int ids[] = {1, 2};
  const Tensor text_before = embed_text(tb.t, ids).value();
  const Tensor vis_before = embed_visual(tb.t, grid, 2).value();
  tb.t.position.mutable_value().at(0, 0) += 1.0;
  CHECK(embed_text(tb.t, ids).value().at(0, 0) == doctest::Approx(text_before.at(0, 0) + 1.0));
  CHECK(embed_visual(tb.t, grid, 2).value().at(0, 0) == doctest::Approx(vis_before.at(0, 0) + 1.0));
  CHECK_THROWS_AS(embed_visual(tb.t, grid, 13), ValidationError);
}

TEST_CASE("fine input equals the composed parts") {
  Tables tb;
  const Page page = two_word_page();
  const Vocab vocab(std::vector<std::string>{"Fax", ":", "555"});
  const TokenizedText tokens = tokenize(page.words, vocab, 16);
  REQUIRE(tokens.size() == 3);
  const DocumentGraph graph = build_graph(page, {30, 1}, {2, 2});
  const FineInput in = build_fine_input(tb.t, tokens, graph);
  CHECK(in.embeddings.rows() == 7);
  CHECK(in.text_len == 3);
  CHECK(in.positions == std::vector<int>{0, 1, 2, 0, 1, 2, 3});

  std::vector<BBox> text_boxes, vis_boxes;
  for (const BBox& b : tokens.boxes) text_boxes.push_back(normalize_box(b, 200, 100));
  for (const BBox& b : graph.patch_boxes()) vis_boxes.push_back(normalize_box(b, 200, 100));
  const Tensor text = ops::add(embed_text(tb.t, tokens.ids), embed_layout(tb.t, text_boxes)).value();
  const Tensor vis =
      ops::add(embed_visual(tb.t, patch_features(tb.t, page, {2, 2}), 3), embed_layout(tb.t, vis_boxes)).value();
  for (size_t c = 0; c < 12; ++c) {
    for (size_t r = 0; r < 3; ++r) CHECK(in.embeddings.value().at(r, c) == text.at(r, c));
    for (size_t r = 0; r < 4; ++r) CHECK(std::abs(in.embeddings.value().at(3 + r, c) - vis.at(r, c)) < 1e-15);
  }

  tb.zero();
  const Tensor zero = build_fine_input(tb.t, tokens, graph).embeddings.value();
  for (size_t i = 0; i < zero.size(); ++i) CHECK(zero[i] == 0.0);
}

TEST_CASE("identical tokens at identical boxes give identical rows up to position") {
  Tables tb;
  tb.t.position.mutable_value().fill(0.0);
  const int ids[] = {3, 5, 3};
  const std::vector<BBox> boxes{{1, 1, 9, 9}, {20, 1, 30, 9}, {1, 1, 9, 9}};
  const Tensor out = ops::add(embed_text(tb.t, ids), embed_layout(tb.t, boxes)).value();
  for (size_t c = 0; c < 12; ++c) CHECK(out.at(0, c) == out.at(2, c));
}
