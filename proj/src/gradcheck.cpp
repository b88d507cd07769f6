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

#include "mmlayout/gradcheck.hpp"

#include "mmlayout/model.hpp"

namespace mmlayout {

Page gradcheck_document() {
  return parse_document(R"({
    "width": 400, "height": 300,
    "words": [
      {"text": "Date:",   "bbox": [20, 40, 70, 60],   "segment_id": 0},
      {"text": "January", "bbox": [90, 40, 160, 60],  "segment_id": 1},
      {"text": "5,",      "bbox": [170, 40, 190, 60], "segment_id": 1},
      {"text": "1989",    "bbox": [200, 40, 240, 60], "segment_id": 1},
      {"text": "Total:",  "bbox": [20, 150, 80, 170], "segment_id": 2},
      {"text": "$12.50",  "bbox": [100, 150, 160, 170], "segment_id": 3}
    ],
    "segments": [
      {"text": "Date:",           "bbox": [20, 40, 70, 60],   "word_ids": [0]},
      {"text": "January 5, 1989", "bbox": [90, 40, 240, 60],  "word_ids": [1, 2, 3]},
      {"text": "Total:",          "bbox": [20, 150, 80, 170], "word_ids": [4]},
      {"text": "$12.50",          "bbox": [100, 150, 160, 170], "word_ids": [5]}
    ],
    "labels": ["B-QUESTION", "B-ANSWER", "I-ANSWER", "I-ANSWER", "B-QUESTION", "B-ANSWER"]
  })");
}

ModelConfig gradcheck_config(std::uint64_t seed) {
  ModelConfig c;
  c.d_model = 16;
  c.heads = 4;
  c.fine_layers = 2;
  c.coarse_layers = 1;
  c.commonsense_k = 4;
  c.grid = {3, 3};
  c.max_len = 32;
  c.vocab_size = 64;
  c.rel_1d_buckets = 8;
  c.rel_2d_buckets = 8;
  c.init_std = 0.3;
  c.seed = seed;
  return c;
}

GradCheckResult run_model_grad_check(const ModelConfig& cfg, const Page& page, double h) {
  const Page pages[] = {page};
  MmLayoutModel model(cfg, Vocab::build(pages, static_cast<size_t>(cfg.vocab_size)));
  const PreparedDocument doc = model.prepare(page);
  return grad_check([&]() { return model.loss(doc); }, model.params(), h);
}

}  // namespace mmlayout
