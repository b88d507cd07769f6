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

#include "mmlayout/config.hpp"

#include <fstream>
#include <set>

#include "mmlayout/error.hpp"

namespace mmlayout {
namespace {

using nlohmann::json;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError("config: " + msg);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError(std::string("config: unknown ") + section + " field '" + it.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      dst = it->get<T>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("config: bad value for '") + key + "'");
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  require(d_model >= 6, "d_model must be at least 6 (six layout slices)");
  require(heads >= 1 && d_model % heads == 0, "d_model must be divisible by heads");
  require(fine_layers >= 0, "fine_layers must be >= 0");
  require(coarse_layers >= 0 && coarse_layers <= 5, "coarse_layers must be in [0,5]");
  require(ffn_dim >= 0, "ffn_dim must be >= 0");
  require(vocab_size >= 2, "vocab_size must be >= 2");
  require(max_len >= 1, "max_len must be >= 1");
  require(grid.cols >= 1 && grid.rows >= 1, "grid must be at least 1x1");
  require(commonsense_k >= 0, "commonsense_k must be >= 0");
  require(commonsense_dim >= 0, "commonsense_dim must be >= 0");
  require(radius >= 0, "radius must be >= 0");
  require(min_pts >= 0, "min_pts must be >= 0");
  require(dropout >= 0 && dropout < 1, "dropout must be in [0,1)");
  require(rel_1d_buckets >= 2 && rel_1d_buckets % 2 == 0, "rel_1d_buckets must be even and >= 2");
  require(rel_2d_buckets >= 2 && rel_2d_buckets % 2 == 0, "rel_2d_buckets must be even and >= 2");
  require(rel_1d_max_distance >= 1 && rel_2d_max_distance >= 1, "max distances must be >= 1");
  require(init_std > 0, "init_std must be positive");
  require(!entity_types.empty(), "entity_types must not be empty");
}

void TrainConfig::validate() const {
  require(lr > 0, "lr must be positive");
  require(warmup_steps >= 0 && total_steps >= 0, "step counts must be non-negative");
  require(total_steps == 0 || warmup_steps <= total_steps, "warmup_steps must not exceed total_steps");
  require(weight_decay >= 0, "weight_decay must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(eval_every >= 0, "eval_every must be >= 0");
  require(grad_clip >= 0, "grad_clip must be >= 0");
  require(holdout_fraction >= 0 && holdout_fraction < 1, "holdout_fraction must be in [0,1)");
}

json to_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},
          {"heads", c.heads},
          {"fine_layers", c.fine_layers},
          {"coarse_layers", c.coarse_layers},
          {"ffn_dim", c.ffn_dim},
          {"vocab_size", c.vocab_size},
          {"max_len", c.max_len},
          {"grid", {c.grid.cols, c.grid.rows}},
          {"commonsense_k", c.commonsense_k},
          {"commonsense_dim", c.commonsense_dim},
          {"radius", c.radius},
          {"min_pts", c.min_pts},
          {"dropout", c.dropout},
          {"seed", c.seed},
          {"rel_1d_buckets", c.rel_1d_buckets},
          {"rel_2d_buckets", c.rel_2d_buckets},
          {"rel_1d_max_distance", c.rel_1d_max_distance},
          {"rel_2d_max_distance", c.rel_2d_max_distance},
          {"activation", c.activation == Activation::kGelu ? "gelu" : "relu"},
          {"aggregation", c.aggregation == Aggregation::kSum ? "sum" : "mean"},
          {"bypass_cross_grained", c.bypass_cross_grained},
          {"init_std", c.init_std},
          {"entity_types", c.entity_types}};
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"warmup_steps", c.warmup_steps},
          {"total_steps", c.total_steps},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"eval_every", c.eval_every},
          {"grad_clip", c.grad_clip},
          {"holdout_fraction", c.holdout_fraction}};
}

ModelConfig model_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: model section must be an object");
  reject_unknown(j,
                 {"d_model", "heads", "fine_layers", "coarse_layers", "ffn_dim", "vocab_size", "max_len", "grid",
                  "commonsense_k", "commonsense_dim", "radius", "min_pts", "dropout", "seed", "rel_1d_buckets",
                  "rel_2d_buckets", "rel_1d_max_distance", "rel_2d_max_distance", "activation", "aggregation",
                  "bypass_cross_grained", "init_std", "entity_types"},
                 "model");
  ModelConfig c;
  read(j, "d_model", c.d_model);
  read(j, "heads", c.heads);
  read(j, "fine_layers", c.fine_layers);
  read(j, "coarse_layers", c.coarse_layers);
  read(j, "ffn_dim", c.ffn_dim);
  read(j, "vocab_size", c.vocab_size);
  read(j, "max_len", c.max_len);
  if (j.contains("grid")) {
    std::vector<int> g;
    read(j, "grid", g);
    require(g.size() == 2, "grid must be [W,H]");
    c.grid = {g[0], g[1]};
  }
  read(j, "commonsense_k", c.commonsense_k);
  read(j, "commonsense_dim", c.commonsense_dim);
  read(j, "radius", c.radius);
  read(j, "min_pts", c.min_pts);
  read(j, "dropout", c.dropout);
  read(j, "seed", c.seed);
  read(j, "rel_1d_buckets", c.rel_1d_buckets);
  read(j, "rel_2d_buckets", c.rel_2d_buckets);
  read(j, "rel_1d_max_distance", c.rel_1d_max_distance);
  read(j, "rel_2d_max_distance", c.rel_2d_max_distance);
  if (j.contains("activation")) {
    std::string a;
    read(j, "activation", a);
    require(a == "gelu" || a == "relu", "activation must be gelu or relu");
    c.activation = a == "gelu" ? Activation::kGelu : Activation::kRelu;
  }
  if (j.contains("aggregation")) {
    std::string a;
    read(j, "aggregation", a);
    require(a == "sum" || a == "mean", "aggregation must be sum or mean");
    c.aggregation = a == "sum" ? Aggregation::kSum : Aggregation::kMean;
  }
  read(j, "bypass_cross_grained", c.bypass_cross_grained);
  read(j, "init_std", c.init_std);
  read(j, "entity_types", c.entity_types);
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: train section must be an object");
  reject_unknown(j,
                 {"lr", "warmup_steps", "total_steps", "weight_decay", "batch_size", "epochs", "seed", "eval_every",
                  "grad_clip", "holdout_fraction"},
                 "train");
  TrainConfig c;
  read(j, "lr", c.lr);
  read(j, "warmup_steps", c.warmup_steps);
  read(j, "total_steps", c.total_steps);
  read(j, "weight_decay", c.weight_decay);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "eval_every", c.eval_every);
  read(j, "grad_clip", c.grad_clip);
  read(j, "holdout_fraction", c.holdout_fraction);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed config " + path.string() + ": " + e.what());
  }
  reject_unknown(j, {"model", "train"}, "top-level");
  RunConfig rc;
  if (j.contains("model")) rc.model = model_config_from_json(j["model"]);
  if (j.contains("train")) rc.train = train_config_from_json(j["train"]);
  return rc;
}

}  // namespace mmlayout
