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
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmlayout/config.hpp"
#include "mmlayout/metrics.hpp"
#include "mmlayout/model.hpp"

namespace mmlayout {

// Raised when the loss stops being finite.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resolved step counts for a run.
struct Schedule {
  long warmup = 0;
  long total = 0;
};
Schedule resolve_schedule(const TrainConfig& cfg, size_t train_docs);

// peak * step / warmup up to warmup, then peak * (total - step) / (total -
// warmup); 0 at and beyond total.
double lr_schedule(long step, double peak, const Schedule& s);

struct EvalResult {
  Prf micro;
  std::map<std::string, Prf> per_type;
  double loss = 0;  // mean per-document loss; 0 when unlabeled
  std::vector<std::vector<std::string>> predictions;  // word tags per document
};

// Forward passes run without recording a graph.
EvalResult evaluate(const MmLayoutModel& model, std::span<const PreparedDocument> docs);

// Scores word-tag predictions against the pages' gold labels.
EvalResult score_predictions(std::span<const Page> pages, const std::vector<std::vector<std::string>>& predictions);

struct TrainOptions {
  // When set: metrics.jsonl and best.ckpt are written here.
  std::filesystem::path out_dir;
  std::function<void(const nlohmann::json&)> on_log;
};

struct TrainResult {
  std::vector<nlohmann::json> log;  // {step, loss, f1, lr} per evaluation
  double best_f1 = -1;
  long best_step = 0;
  long steps = 0;
};

// Adam with decoupled weight decay over mini-batches of documents; each
// document contributes loss / batch to the accumulated gradient. Evaluates
// on `dev` every eval_every steps (or once per epoch) and keeps the best
// micro F1 in out_dir/best.ckpt. The model holds the final parameters on
// return. Throws TrainingError on a non-finite loss after writing
// nan_dump.json.
TrainResult train(MmLayoutModel& model, std::span<const PreparedDocument> train_docs,
                  std::span<const PreparedDocument> dev_docs, const TrainConfig& cfg,
                  const TrainOptions& options = {});

std::vector<PreparedDocument> prepare_all(const MmLayoutModel& model, std::span<const Page> pages);

// The last ceil(fraction * n) pages go to the second half; at least one page
// stays on each side when n >= 2.
std::pair<std::vector<Page>, std::vector<Page>> split_holdout(std::vector<Page> pages, double fraction);

// Checkpoints carry the model config and vocabulary in their metadata.
void save_model(const std::filesystem::path& path, const MmLayoutModel& model, const nlohmann::json& extra = {});
std::unique_ptr<MmLayoutModel> load_model(const std::filesystem::path& path);

// Throws ValidationError if a page carries a tag the model cannot emit.
void check_labels(const MmLayoutModel& model, std::span<const Page> pages);

struct AblationVariant {
  std::string run;
  ModelConfig config;
};

// components: full model and the three "w/o" rows; coarse_layers: M = 0..5;
// radius: r in {5, 10, 30, 50, 100}.
std::vector<AblationVariant> ablation_variants(const ModelConfig& base, const std::string& axis);

struct AblationRow {
  std::string run;
  std::vector<std::uint64_t> seeds;
  std::vector<Prf> per_seed;
  Prf mean;  // seed-averaged precision, recall and F1
};

// Trains every variant once per seed on `train_pages` and scores the final
// model on `test_pages`.
std::vector<AblationRow> ablate(std::span<const Page> train_pages, std::span<const Page> test_pages,
                                const ModelConfig& base, const TrainConfig& train_cfg, const std::string& axis,
                                std::span<const std::uint64_t> seeds,
                                const std::function<void(const std::string&)>& progress = {});

// Header run,seed,f1,precision,recall; one row per variant with the seeds
// joined by ';'.
std::string ablation_csv(std::span<const AblationRow> rows);

}  // namespace mmlayout
