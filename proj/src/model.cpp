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

#include "mmlayout/model.hpp"

#include <cmath>
#include <map>

#include "mmlayout/error.hpp"

namespace mmlayout {
namespace {

// Each parameter group draws from its own stream so that configurations
// which drop a group still initialise the shared groups identically.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

}  // namespace

Var aggregate(const Var& fine, std::span<const int> fine_parent, size_t coarse_rows, Aggregation mode) {
  if (fine_parent.size() != fine.rows()) {
    throw ShapeError("aggregate: " + std::to_string(fine_parent.size()) + " parents for " +
                     std::to_string(fine.rows()) + " fine rows");
  }
  Var out = ops::scatter_add_rows(fine, fine_parent, coarse_rows);
  if (mode == Aggregation::kSum) return out;
  std::vector<double> count(coarse_rows, 0.0);
  for (int p : fine_parent) count[p] += 1.0;
  Tensor scale(out.shape());
  for (size_t r = 0; r < coarse_rows; ++r) {
    const double s = count[r] > 0 ? 1.0 / count[r] : 0.0;
    for (double& v : scale.row(r)) v = s;
  }
  return ops::mul(out, Var::constant(std::move(scale)));
}

Var fuse(const Var& fine, const Var& coarse, std::span<const int> fine_parent) {
  if (fine_parent.size() != fine.rows()) throw ShapeError("fuse: one parent per fine row required");
  for (size_t i = 0; i < fine_parent.size(); ++i) {
    if (fine_parent[i] < 0 || static_cast<size_t>(fine_parent[i]) >= coarse.rows()) {
      throw ValidationError("fuse: fine node " + std::to_string(i) + " has no valid parent");
    }
  }
  return ops::add(fine, ops::gather_rows(coarse, fine_parent));
}

MmLayoutModel::MmLayoutModel(ModelConfig cfg, Vocab vocab)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), tags_(cfg_.entity_types) {
  cfg_.validate();
  const CommonSenseInventory standard = CommonSenseInventory::standard();
  inventory_ = standard.first(static_cast<size_t>(cfg_.commonsense_k));

  auto rng = stream(cfg_.seed, 1);
  embeddings_ = EmbeddingTables::create(params_, cfg_, vocab_.size(), rng);
  rng = stream(cfg_.seed, 2);
  fine_bias_ = RelativeBiasTables::create(params_, "fine.bias", AttentionConfig::from(cfg_), cfg_.init_std, rng);
  for (int i = 0; i < cfg_.fine_layers; ++i) {
    rng = stream(cfg_.seed, 100 + static_cast<std::uint64_t>(i));
    fine_layers_.push_back(TransformerLayer::create(params_, "fine." + std::to_string(i), cfg_, rng));
  }
  if (!cfg_.bypass_cross_grained) {
    if (cfg_.commonsense_k > 0) {
      rng = stream(cfg_.seed, 3);
      commonsense_ = CommonSenseTables::create(params_, cfg_, rng);
    }
    for (int i = 0; i < cfg_.coarse_layers; ++i) {
      rng = stream(cfg_.seed, 200 + static_cast<std::uint64_t>(i));
      coarse_layers_.push_back(TransformerLayer::create(params_, "coarse." + std::to_string(i), cfg_, rng));
    }
  }
  rng = stream(cfg_.seed, 4);
  const size_t d = static_cast<size_t>(cfg_.d_model);
  head_weight_ = params_.add("head.weight", truncated_normal({d, tags_.size()}, cfg_.init_std, rng));
  head_bias_ = params_.add("head.bias", Tensor({tags_.size()}), false);
}

PreparedDocument MmLayoutModel::prepare(const Page& page) const {
  if (page.segments.empty()) throw ValidationError("page has no segments; nothing to encode");
  return prepare(page, build_graph(page, cfg_.cluster_params(), cfg_.grid));
}

PreparedDocument MmLayoutModel::prepare(const Page& page, DocumentGraph graph) const {
  PreparedDocument doc;
  doc.graph = std::move(graph);
  const Page& p = doc.graph.page();
  doc.tokens = tokenize(p.words, vocab_, static_cast<size_t>(cfg_.max_len));
  doc.patch_descriptors = patch_descriptors(p, doc.graph.grid());

  for (const BBox& b : doc.tokens.boxes) doc.fine_boxes.push_back(normalize_box(b, p.width, p.height));
  for (const BBox& b : doc.graph.patch_boxes()) doc.fine_boxes.push_back(normalize_box(b, p.width, p.height));
  for (size_t i = 0; i < doc.tokens.size(); ++i) doc.fine_positions.push_back(static_cast<int>(i));
  for (size_t i = 0; i < doc.graph.patch_boxes().size(); ++i) doc.fine_positions.push_back(static_cast<int>(i));
  doc.relative = RelativeIndex::build(doc.fine_boxes, doc.fine_positions, AttentionConfig::from(cfg_));

  for (const Segment& s : p.segments) doc.coarse_boxes.push_back(normalize_box(s.bbox, p.width, p.height));
  for (const SalientRegion& r : doc.graph.regions()) doc.coarse_boxes.push_back(normalize_box(r.bbox, p.width, p.height));
  doc.commonsense = detect_segments(inventory_, p.segments);

  const int z = static_cast<int>(p.segments.size());
  for (int w : doc.tokens.word_index) doc.fine_parent.push_back(doc.graph.text_parent()[w]);
  for (int r : doc.graph.visual_parent()) doc.fine_parent.push_back(z + r);

  if (!page.labels.empty()) {
    if (page.labels.size() != page.words.size()) throw ValidationError("labels must have one tag per word");
    for (size_t i = 0; i < doc.tokens.size(); ++i) {
      doc.targets.push_back(doc.tokens.first_piece[i] ? tags_.id(page.labels[doc.tokens.word_index[i]])
                                                      : ops::kIgnoreIndex);
    }
  }
  return doc;
}

Var MmLayoutModel::fine_input(const PreparedDocument& doc) const {
  return embed_fine(embeddings_, doc.tokens.ids, doc.patch_descriptors, doc.fine_boxes);
}

Var MmLayoutModel::fine_encode(const Var& input, const RelativeIndex& relative, std::mt19937_64* rng) const {
  Var h = input;
  for (const TransformerLayer& layer : fine_layers_) h = layer.forward(h, fine_bias_, relative, rng);
  return h;
}

Var MmLayoutModel::commonsense_embed(const Tensor& bits) const {
  if (cfg_.commonsense_k == 0 || cfg_.bypass_cross_grained || bits.rows() == 0) return Var();
  return mmlayout::commonsense_embed(Var::constant(bits), commonsense_);
}

Var MmLayoutModel::coarse_input(const Var& aggregated, const Var& commonsense,
                                std::span<const BBox> coarse_boxes) const {
  Var x = aggregated;
  if (commonsense.defined()) {
    const size_t rest = aggregated.rows() - commonsense.rows();
    const Var parts[] = {commonsense, Var::constant(Tensor({rest, aggregated.cols()}))};
    x = ops::add(x, ops::concat_rows(parts));
  }
  return ops::add(x, embed_layout(embeddings_, coarse_boxes));
}

Var MmLayoutModel::coarse_encode(const Var& input, std::mt19937_64* rng) const {
  Var h = input;
  for (const TransformerLayer& layer : coarse_layers_) h = layer.forward(h, rng);
  return h;
}

Var MmLayoutModel::labeling_head(const Var& text_rows) const {
  return ops::linear(text_rows, head_weight_, head_bias_);
}

ForwardResult MmLayoutModel::forward(const PreparedDocument& doc, std::mt19937_64* rng) const {
  ForwardResult r;
  r.fine_input = fine_input(doc);
  r.fine_output = fine_encode(r.fine_input, doc.relative, rng);
  if (cfg_.bypass_cross_grained) {
    r.fused = r.fine_output;
  } else {
    r.aggregated = aggregate(r.fine_output, doc.fine_parent, doc.coarse_boxes.size(), cfg_.aggregation);
    r.commonsense = commonsense_embed(doc.commonsense);
    r.coarse_input = coarse_input(r.aggregated, r.commonsense, doc.coarse_boxes);
    r.coarse_output = coarse_encode(r.coarse_input, rng);
    r.fused = fuse(r.fine_output, r.coarse_output, doc.fine_parent);
  }
  if (doc.text_len() > 0) r.logits = labeling_head(ops::slice_rows(r.fused, 0, doc.text_len()));
  return r;
}

Var MmLayoutModel::loss(const PreparedDocument& doc, std::mt19937_64* rng) const {
  if (doc.targets.empty()) throw ValidationError("document has no labels to train on");
  return ops::cross_entropy(forward(doc, rng).logits, doc.targets);
}

std::vector<std::string> MmLayoutModel::predict(const PreparedDocument& doc) const {
  NoGradGuard guard;
  const ForwardResult r = forward(doc);
  const size_t words = doc.graph.page().words.size();
  std::vector<std::string> out(words, "O");
  if (!r.logits.defined()) return out;
  const Tensor& logits = r.logits.value();
  for (size_t i = 0; i < doc.tokens.size(); ++i) {
    if (!doc.tokens.first_piece[i]) continue;
    const auto row = logits.row(i);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    out[doc.tokens.word_index[i]] = tags_.tag(static_cast<int>(best));
  }
  return out;
}

nlohmann::json MmLayoutModel::describe(const ForwardResult& r) {
  nlohmann::json out = nlohmann::json::object();
  const std::pair<const char*, const Var*> stages[] = {
      {"fine_input", &r.fine_input},     {"fine_output", &r.fine_output},   {"aggregated", &r.aggregated},
      {"commonsense", &r.commonsense},   {"coarse_input", &r.coarse_input}, {"coarse_output", &r.coarse_output},
      {"fused", &r.fused},               {"logits", &r.logits}};
  for (const auto& [name, v] : stages) {
    if (!v->defined()) continue;
    double sq = 0;
    const Tensor& t = v->value();
    for (size_t i = 0; i < t.size(); ++i) sq += t[i] * t[i];
    out[name] = {{"shape", t.shape()}, {"norm", std::sqrt(sq)}};
  }
  return out;
}

size_t copy_shared_parameters(const ParamStore& from, ParamStore& to) {
  std::map<std::string, const Tensor*> source;
  for (const auto& e : from.entries()) source[e.name] = &e.var.value();
  size_t copied = 0;
  for (auto& e : to.entries()) {
    auto it = source.find(e.name);
    if (it == source.end() || it->second->shape() != e.var.shape()) continue;
    e.var.mutable_value() = *it->second;
    ++copied;
  }
  return copied;
}

}  // namespace mmlayout
