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
#include <string>
#include <vector>

#include <json.hpp>

#include "mmlayout/clustering.hpp"
#include "mmlayout/doc_graph.hpp"

namespace mmlayout {

enum class Activation { kGelu, kRelu };
enum class Aggregation { kSum, kMean };

struct ModelConfig {
  int d_model = 64;
  int heads = 4;
  int fine_layers = 2;    // N
  int coarse_layers = 1;  // M; 0 drops the coarse encoder
  int ffn_dim = 0;        // 0 means 4 * d_model
  int vocab_size = 8192;  // upper bound when building a vocabulary
  int max_len = 512;
  PatchGrid grid{7, 7};
  int commonsense_k = 8;    // K; 0 disables common-sense enhancement
  int commonsense_dim = 0;  // d_c; 0 means d_model
  double radius = 30.0;
  int min_pts = 1;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  int rel_1d_buckets = 32;
  int rel_2d_buckets = 32;
  int rel_1d_max_distance = 128;
  int rel_2d_max_distance = 1000;
  Activation activation = Activation::kGelu;
  Aggregation aggregation = Aggregation::kSum;
  // Skip aggregation, the coarse encoder and fusion entirely; the model is
  // then a plain fine-grained spatial-aware encoder.
  bool bypass_cross_grained = false;
  double init_std = 0.02;
  std::vector<std::string> entity_types{"HEADER", "QUESTION", "ANSWER"};

  int ffn_width() const { return ffn_dim > 0 ? ffn_dim : 4 * d_model; }
  int commonsense_width() const { return commonsense_dim > 0 ? commonsense_dim : d_model; }
  int head_dim() const { return d_model / heads; }
  // Width of each of the six coordinate slices of the layout embedding.
  int coord_dim() const { return d_model / 6; }
  ClusterParams cluster_params() const { return {radius, min_pts}; }

  // Throws ValidationError on any broken invariant.
  void validate() const;
};

struct TrainConfig {
  double lr = 5e-5;
  int warmup_steps = 0;  // 0: 10% of total_steps
  int total_steps = 0;   // 0: epochs * ceil(train_docs / batch_size)
  double weight_decay = 0.01;
  int batch_size = 8;
  int epochs = 20;
  std::uint64_t seed = 0;
  int eval_every = 0;        // steps; 0 evaluates once per epoch
  double grad_clip = 1.0;    // 0 disables clipping
  double holdout_fraction = 0.1;

  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
// Unknown keys are rejected; missing keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);

// {"model": {...}, "train": {...}}; either section may be omitted.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mmlayout
