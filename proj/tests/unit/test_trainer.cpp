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
#include <fstream>
#include <vector>

#include "mmlayout/error.hpp"
#include "mmlayout/gradcheck.hpp"
#include "mmlayout/synth.hpp"
#include "mmlayout/trainer.hpp"

using namespace mmlayout;

namespace {

std::vector<Page> synth_pages(std::uint64_t seed, int count, bool cue = false) {
  SynthParams sp;
  sp.seed = seed;
  sp.count = count;
  sp.region_cue = cue;
  std::vector<Page> out;
  for (auto& d : synth_generate(sp).documents) out.push_back(std::move(d.page));
  return out;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.d_model = 16;
  c.heads = 2;
  c.fine_layers = 1;
  c.coarse_layers = 1;
  c.grid = {2, 2};
  c.vocab_size = 512;
  c.max_len = 256;
  return c;
}

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("learning rate schedule") {
  const Schedule s{10, 100};
  CHECK(lr_schedule(0, 1.0, s) == 0.0);
  CHECK(lr_schedule(5, 1.0, s) == 0.5);
  CHECK(lr_schedule(10, 1.0, s) == 1.0);
  CHECK(lr_schedule(55, 1.0, s) == 0.5);
  CHECK(lr_schedule(100, 1.0, s) == 0.0);
  CHECK(lr_schedule(150, 1.0, s) == 0.0);
  // continuity at the warmup boundary and piecewise linearity
  CHECK(std::abs(lr_schedule(11, 1.0, s) - lr_schedule(10, 1.0, s)) < 0.02);
  for (long t = 1; t < 9; ++t)
    CHECK(std::abs((lr_schedule(t + 1, 1.0, s) - lr_schedule(t, 1.0, s)) - 0.1) < 1e-12);
  for (long t = 11; t < 99; ++t)
    CHECK(std::abs((lr_schedule(t + 1, 1.0, s) - lr_schedule(t, 1.0, s)) + 1.0 / 90) < 1e-12);

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  const Schedule r = resolve_schedule(cfg, 10);
  CHECK(r.total == 9);
  CHECK(r.warmup == 0);
  cfg.epochs = 20;
  CHECK(resolve_schedule(cfg, 10).warmup == 6);
  cfg.warmup_steps = 100;
  CHECK_THROWS_AS(resolve_schedule(cfg, 10), ValidationError);
}

TEST_CASE("one step moves every parameter group") {
  const Page page = gradcheck_document();
  const std::vector<Page> pages{page};
  MmLayoutModel model(gradcheck_config(0), Vocab::build(pages, 64));
  const auto before = model.params().snapshot();
  const auto docs = prepare_all(model, pages);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.total_steps = 2;  // lr is zero at the final step
  cfg.warmup_steps = 1;
  cfg.batch_size = 1;
  cfg.weight_decay = 0;
  const TrainResult r = train(model, docs, {}, cfg);
  CHECK(r.steps == 2);
  const auto& entries = model.params().entries();
  for (size_t i = 0; i < entries.size(); ++i) {
    CAPTURE(entries[i].name);
    CHECK(max_abs_diff(entries[i].var.value(), before[i]) > 0);
  }
}

TEST_CASE("training is deterministic and lowers the loss") {
  const auto pages = synth_pages(1, 24);
  auto run = [&] {
    MmLayoutModel model(tiny_config(), Vocab::build(pages, 512));
    const auto docs = prepare_all(model, pages);
    TrainConfig cfg;
    cfg.lr = 3e-3;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.warmup_steps = 1;
    const double initial = evaluate(model, docs).loss;
    const TrainResult r = train(model, docs, docs, cfg);
    return std::make_pair(initial, r);
  };
  const auto [initial, a] = run();
  const auto [initial_b, b] = run();
  REQUIRE(a.log.size() == 3);
  CHECK(a.log == b.log);
  CHECK(initial == initial_b);
  CHECK(a.log[0]["loss"].get<double>() < initial);
  CHECK(a.log[2]["loss"].get<double>() < a.log[0]["loss"].get<double>());
}

TEST_CASE("evaluation fixtures") {
  const auto pages = synth_pages(2, 6);
  std::vector<std::vector<std::string>> gold, empty;
  for (const Page& p : pages) {
    gold.push_back(p.labels);
    empty.emplace_back(p.labels.size(), "O");
  }
  CHECK(score_predictions(pages, gold).micro.f1 == 1.0);
  const EvalResult none = score_predictions(pages, empty);
  CHECK(none.micro.recall == 0.0);
  CHECK(none.micro.predicted == 0);
  CHECK_THROWS_AS(score_predictions(pages, {}), ValidationError);

  // evaluate agrees with rescoring its own predictions
  MmLayoutModel model(tiny_config(), Vocab::build(pages, 512));
  const auto docs = prepare_all(model, pages);
  const EvalResult r = evaluate(model, docs);
  const EvalResult again = score_predictions(pages, r.predictions);
  CHECK(again.micro.f1 == r.micro.f1);
  CHECK(again.micro.true_positives == r.micro.true_positives);
}

TEST_CASE("checkpoint round trip reproduces evaluation") {
  const auto pages = synth_pages(3, 8);
  MmLayoutModel model(tiny_config(), Vocab::build(pages, 512));
  const auto docs = prepare_all(model, pages);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  train(model, docs, {}, cfg);
  const auto dir = scratch("mmlayout_trainer_ckpt");
  std::filesystem::create_directories(dir);
  save_model(dir / "m.ckpt", model);
  const auto loaded = load_model(dir / "m.ckpt");
  CHECK(loaded->vocab() == model.vocab());
  const auto docs2 = prepare_all(*loaded, pages);
  const EvalResult a = evaluate(model, docs), b = evaluate(*loaded, docs2);
  CHECK(a.loss == b.loss);
  CHECK(a.predictions == b.predictions);
  CHECK(a.micro.f1 == b.micro.f1);

  std::vector<Page> foreign = pages;
  foreign[0].labels[0] = "B-DATE";
  CHECK_THROWS_AS(check_labels(*loaded, foreign), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("train writes its artifacts") {
  const auto pages = synth_pages(4, 6);
  MmLayoutModel model(tiny_config(), Vocab::build(pages, 512));
  const auto docs = prepare_all(model, pages);
  const auto dir = scratch("mmlayout_trainer_out");
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = 2;
  cfg.batch_size = 3;
  int logged = 0;
  TrainOptions opts;
  opts.out_dir = dir;
  opts.on_log = [&](const nlohmann::json&) { ++logged; };
  const TrainResult r = train(model, docs, docs, cfg, opts);
  CHECK(logged == 2);
  CHECK(std::filesystem::exists(dir / "metrics.jsonl"));
  CHECK(std::filesystem::exists(dir / "best.ckpt"));
  CHECK(read_checkpoint_meta(dir / "best.ckpt")["step"] == r.best_step);
  std::filesystem::remove_all(dir);
}

TEST_CASE("non finite loss aborts with a dump") {
  const auto pages = synth_pages(5, 4);
  MmLayoutModel model(tiny_config(), Vocab::build(pages, 512));
  const auto docs = prepare_all(model, pages);
  for (auto& e : model.params().entries())
    if (e.name == "head.bias") e.var.mutable_value()[0] = NAN;
  const auto dir = scratch("mmlayout_trainer_nan");
  TrainOptions opts;
  opts.out_dir = dir;
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(model, docs, {}, cfg, opts), TrainingError);
  CHECK(std::filesystem::exists(dir / "nan_dump.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("input errors") {
  MmLayoutModel model(tiny_config(), Vocab());
  TrainConfig cfg;
  CHECK_THROWS_AS(train(model, {}, {}, cfg), ValidationError);
  std::vector<Page> unlabeled = synth_pages(6, 1);
  unlabeled[0].labels.clear();
  const auto docs = prepare_all(model, unlabeled);
  CHECK_THROWS_AS(train(model, docs, {}, cfg), ValidationError);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("holdout split") {
  const auto pages = synth_pages(7, 10);
  auto [train_part, test_part] = split_holdout(pages, 0.1);
  CHECK(train_part.size() == 9);
  CHECK(test_part.size() == 1);
  CHECK(serialize_document(test_part[0]) == serialize_document(pages[9]));
  std::tie(train_part, test_part) = split_holdout(pages, 0.25);
  CHECK(test_part.size() == 3);
  CHECK_THROWS_AS(split_holdout(pages, 1.0), ValidationError);
}

TEST_CASE("ablation grids") {
  const ModelConfig base = tiny_config();
  const auto radius = ablation_variants(base, "radius");
  REQUIRE(radius.size() == 5);
  const double expect[] = {5, 10, 30, 50, 100};
  for (size_t i = 0; i < 5; ++i) CHECK(radius[i].config.radius == expect[i]);
  const auto layers = ablation_variants(base, "coarse_layers");
  REQUIRE(layers.size() == 6);
  CHECK(layers[0].run == "w/o Coarse-grained Encoder");
  CHECK(layers[3].run == "(3,CL)");
  CHECK(layers[5].config.coarse_layers == 5);
  CHECK_THROWS_AS(ablation_variants(base, "depth"), ValidationError);

  const auto pages = synth_pages(8, 6);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = 1;
  cfg.batch_size = 3;
  const std::vector<std::uint64_t> seeds{0, 1};
  const std::vector<Page> train_pages(pages.begin(), pages.begin() + 4), test_pages(pages.begin() + 4, pages.end());
  const auto rows = ablate(train_pages, test_pages, base, cfg, "components", seeds);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.per_seed.size() == 2);
    CHECK(std::abs(r.mean.f1 - (r.per_seed[0].f1 + r.per_seed[1].f1) / 2) < 1e-12);
  }
  const std::string csv = ablation_csv(rows);
  CHECK(csv.rfind("run,seed,f1,precision,recall\n", 0) == 0);
  CHECK(csv.find("\nmmLayout,0;1,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
