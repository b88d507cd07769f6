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

#include "mmlayout/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "mmlayout/error.hpp"

namespace mmlayout {

Schedule resolve_schedule(const TrainConfig& cfg, size_t train_docs) {
  Schedule s;
  const long per_epoch = static_cast<long>((train_docs + cfg.batch_size - 1) / cfg.batch_size);
  s.total = cfg.total_steps > 0 ? cfg.total_steps : static_cast<long>(cfg.epochs) * per_epoch;
  s.warmup = cfg.warmup_steps > 0 ? cfg.warmup_steps : s.total / 10;
  if (s.warmup > s.total) throw ValidationError("warmup_steps exceeds total steps");
  return s;
}

double lr_schedule(long step, double peak, const Schedule& s) {
  if (step <= 0 || step >= s.total) return 0.0;
  if (step <= s.warmup) return peak * static_cast<double>(step) / static_cast<double>(s.warmup);
  return peak * static_cast<double>(s.total - step) / static_cast<double>(s.total - s.warmup);
}

EvalResult score_predictions(std::span<const Page> pages, const std::vector<std::vector<std::string>>& predictions) {
  if (predictions.size() != pages.size()) throw ValidationError("one prediction list per page required");
  EvalResult r;
  F1Accumulator acc;
  for (size_t i = 0; i < pages.size(); ++i) {
    if (pages[i].labels.empty()) throw ValidationError("page " + std::to_string(i) + " has no gold labels");
    acc.add(bio_decode(predictions[i]), bio_decode(pages[i].labels));
  }
  r.micro = acc.micro();
  r.per_type = acc.per_type();
  r.predictions = predictions;
  return r;
}

EvalResult evaluate(const MmLayoutModel& model, std::span<const PreparedDocument> docs) {
  NoGradGuard guard;
  std::vector<std::vector<std::string>> preds;
  std::vector<Page> pages;
  double loss = 0;
  for (const PreparedDocument& d : docs) {
    preds.push_back(model.predict(d));
    pages.push_back(d.graph.page());
    if (!d.targets.empty()) loss += model.loss(d).value()[0];
  }
  EvalResult r = score_predictions(pages, preds);
  r.loss = docs.empty() ? 0.0 : loss / static_cast<double>(docs.size());
  return r;
}

std::vector<PreparedDocument> prepare_all(const MmLayoutModel& model, std::span<const Page> pages) {
  std::vector<PreparedDocument> out;
  out.reserve(pages.size());
  for (size_t i = 0; i < pages.size(); ++i) {
    try {
      out.push_back(model.prepare(pages[i]));
    } catch (const ValidationError& e) {
      throw ValidationError("document " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::pair<std::vector<Page>, std::vector<Page>> split_holdout(std::vector<Page> pages, double fraction) {
  if (fraction < 0 || fraction >= 1) throw ValidationError("holdout fraction must be in [0,1)");
  size_t held = static_cast<size_t>(std::ceil(fraction * static_cast<double>(pages.size())));
  if (pages.size() >= 2) held = std::clamp<size_t>(held, fraction > 0 ? 1 : 0, pages.size() - 1);
  else held = 0;
  std::vector<Page> tail(std::make_move_iterator(pages.end() - static_cast<std::ptrdiff_t>(held)),
                         std::make_move_iterator(pages.end()));
  pages.resize(pages.size() - held);
  return {std::move(pages), std::move(tail)};
}

void save_model(const std::filesystem::path& path, const MmLayoutModel& model, const nlohmann::json& extra) {
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["model"] = to_json(model.config());
  meta["vocab"] = model.vocab().tokens();
  save_checkpoint(path, model.params(), meta);
}

std::unique_ptr<MmLayoutModel> load_model(const std::filesystem::path& path) {
  const nlohmann::json meta = read_checkpoint_meta(path);
  if (!meta.contains("model") || !meta.contains("vocab")) {
    throw ValidationError("checkpoint " + path.string() + " lacks model config or vocabulary");
  }
  auto model = std::make_unique<MmLayoutModel>(model_config_from_json(meta["model"]),
                                               Vocab(meta["vocab"].get<std::vector<std::string>>()));
  load_checkpoint(path, model->params());
  return model;
}

void check_labels(const MmLayoutModel& model, std::span<const Page> pages) {
  for (size_t i = 0; i < pages.size(); ++i) {
    for (const std::string& t : pages[i].labels) {
      try {
        model.tags().id(t);
      } catch (const ValidationError&) {
        throw ValidationError("document " + std::to_string(i) + " has tag '" + t +
                              "' which the checkpoint's tag set does not contain");
      }
    }
  }
}

namespace {

void dump_nan(const std::filesystem::path& dir, long step, const std::vector<size_t>& batch,
              const std::vector<double>& losses, std::span<const PreparedDocument> docs) {
  nlohmann::json j;
  j["step"] = step;
  j["batch"] = batch;
  j["losses"] = nlohmann::json::array();
  for (double l : losses) j["losses"].push_back(std::isfinite(l) ? nlohmann::json(l) : nlohmann::json(std::to_string(l)));
  j["documents"] = nlohmann::json::array();
  for (size_t i : batch) j["documents"].push_back(serialize_document(docs[i].graph.page()));
  const auto path = (dir.empty() ? std::filesystem::path(".") : dir) / "nan_dump.json";
  std::ofstream(path) << j.dump(2) << "\n";
}

}  // namespace

TrainResult train(MmLayoutModel& model, std::span<const PreparedDocument> train_docs,
                  std::span<const PreparedDocument> dev_docs, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (train_docs.empty()) throw ValidationError("training corpus is empty");
  for (size_t i = 0; i < train_docs.size(); ++i) {
    if (train_docs[i].targets.empty()) throw ValidationError("training document " + std::to_string(i) + " has no labels");
  }
  const Schedule sched = resolve_schedule(cfg, train_docs.size());
  ParamStore& params = model.params();
  AdamState state;
  const AdamConfig adam{0.9, 0.999, 1e-8, cfg.weight_decay};
  std::mt19937_64 rng(cfg.seed);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::mt19937_64* drop = model.config().dropout > 0 ? &dropout_rng : nullptr;

  std::ofstream log_file;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    log_file.open(options.out_dir / "metrics.jsonl", std::ios::trunc);
  }

  TrainResult result;
  double loss_sum = 0;
  long loss_count = 0;
  auto log_eval = [&](long step, double lr) {
    nlohmann::json rec;
    rec["step"] = step;
    rec["loss"] = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    double f1 = 0;
    if (!dev_docs.empty()) f1 = evaluate(model, dev_docs).micro.f1;
    rec["f1"] = f1;
    rec["lr"] = lr;
    loss_sum = 0;
    loss_count = 0;
    result.log.push_back(rec);
    if (log_file.is_open()) log_file << rec.dump() << "\n" << std::flush;
    if (options.on_log) options.on_log(rec);
    if (f1 > result.best_f1) {
      result.best_f1 = f1;
      result.best_step = step;
      if (!options.out_dir.empty()) save_model(options.out_dir / "best.ckpt", model, {{"step", step}, {"f1", f1}});
    }
  };

  std::vector<size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), 0);
  long step = 0;
  double lr = 0;
  while (step < sched.total) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size() && step < sched.total; start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      const std::vector<size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
      params.zero_grad();
      std::vector<double> losses;
      for (size_t i : batch) {
        Var l = model.loss(train_docs[i], drop);
        losses.push_back(l.value()[0]);
        if (!std::isfinite(losses.back())) {
          dump_nan(options.out_dir, step, batch, losses, train_docs);
          throw TrainingError("non-finite loss at step " + std::to_string(step) + "; batch written to nan_dump.json");
        }
        ops::scale(l, 1.0 / static_cast<double>(batch.size())).backward();
      }
      if (cfg.grad_clip > 0) clip_grad_norm(params, cfg.grad_clip);
      ++step;
      lr = lr_schedule(step, cfg.lr, sched);
      adam_step(params, state, lr, adam);
      for (double l : losses) loss_sum += l;
      loss_count += static_cast<long>(losses.size());
      if (cfg.eval_every > 0 && step % cfg.eval_every == 0) log_eval(step, lr);
    }
    if (cfg.eval_every == 0) log_eval(step, lr);
  }
  if (cfg.eval_every > 0 && step % cfg.eval_every != 0) log_eval(step, lr);
  result.steps = step;
  return result;
}

std::vector<AblationVariant> ablation_variants(const ModelConfig& base, const std::string& axis) {
  std::vector<AblationVariant> out;
  if (axis == "components") {
    ModelConfig full = base;
    full.bypass_cross_grained = false;
    out.push_back({"mmLayout", full});
    ModelConfig no_coarse = full;
    no_coarse.coarse_layers = 0;
    out.push_back({"w/o Coarse-grained Encoder", no_coarse});
    ModelConfig no_cs = full;
    no_cs.commonsense_k = 0;
    out.push_back({"w/o Common Sense Enhancement", no_cs});
    ModelConfig bypass = full;
    bypass.bypass_cross_grained = true;
    out.push_back({"w/o Aggregation with Cross-grained Edges", bypass});
  } else if (axis == "coarse_layers") {
    for (int m = 0; m <= 5; ++m) {
      ModelConfig c = base;
      c.coarse_layers = m;
      out.push_back({m == 0 ? "w/o Coarse-grained Encoder" : "(" + std::to_string(m) + ",CL)", c});
    }
  } else if (axis == "radius") {
    for (int r : {5, 10, 30, 50, 100}) {
      ModelConfig c = base;
      c.radius = r;
      out.push_back({"r=" + std::to_string(r), c});
    }
  } else {
    throw ValidationError("unknown ablation axis '" + axis + "' (expected components, coarse_layers or radius)");
  }
  return out;
}

std::vector<AblationRow> ablate(std::span<const Page> train_pages, std::span<const Page> test_pages,
                                const ModelConfig& base, const TrainConfig& train_cfg, const std::string& axis,
                                std::span<const std::uint64_t> seeds,
                                const std::function<void(const std::string&)>& progress) {
  if (seeds.empty()) throw ValidationError("ablate: at least one seed required");
  if (train_pages.empty() || test_pages.empty()) throw ValidationError("ablate: empty train or test split");
  const Vocab vocab = Vocab::build(train_pages, static_cast<size_t>(base.vocab_size));
  std::vector<AblationRow> rows;
  for (const AblationVariant& v : ablation_variants(base, axis)) {
    AblationRow row;
    row.run = v.run;
    for (std::uint64_t seed : seeds) {
      ModelConfig mc = v.config;
      mc.seed = seed;
      TrainConfig tc = train_cfg;
      tc.seed = seed;
      MmLayoutModel model(mc, vocab);
      const auto train_docs = prepare_all(model, train_pages);
      const auto test_docs = prepare_all(model, test_pages);
      train(model, train_docs, {}, tc);
      const Prf prf = evaluate(model, test_docs).micro;
      row.seeds.push_back(seed);
      row.per_seed.push_back(prf);
      if (progress) {
        std::ostringstream msg;
        msg << v.run << " seed " << seed << " f1 " << prf.f1;
        progress(msg.str());
      }
    }
    const double n = static_cast<double>(row.per_seed.size());
    for (const Prf& p : row.per_seed) {
      row.mean.precision += p.precision / n;
      row.mean.recall += p.recall / n;
      row.mean.f1 += p.f1 / n;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "run,seed,f1,precision,recall\n";
  for (const AblationRow& r : rows) {
    std::string seeds;
    for (size_t i = 0; i < r.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(r.seeds[i]);
    out << r.run << "," << seeds << "," << r.mean.f1 << "," << r.mean.precision << "," << r.mean.recall << "\n";
  }
  return out.str();
}

}  // namespace mmlayout
