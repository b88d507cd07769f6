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
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmlayout/autodiff.hpp"

namespace mmlayout {

// Named, ordered collection of trainable leaves. Order is registration order
// and is what the optimizer and checkpoint files iterate over.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Var var;
    bool decay = true;  // false for biases and norm gains
  };

  Var add(const std::string& name, Tensor init, bool decay = true);
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  const Entry& find(const std::string& name) const;
  size_t size() const { return entries_.size(); }
  size_t scalar_count() const;

  void zero_grad();
  double grad_norm() const;

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<Entry> entries_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

// Bias-corrected Adam with decoupled weight decay:
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)
// Parameters with no gradient buffer are treated as having zero gradient.
void adam_step(ParamStore& params, AdamState& state, double lr, const AdamConfig& cfg);

// Rescales gradients so their global L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(ParamStore& params, double max_norm);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  size_t checked = 0;
};

// Compares reverse-mode gradients of a scalar function against central
// differences (f(p+h) - f(p-h)) / 2h, element by element. The relative error
// uses max(|analytic|, |numeric|, 1e-8) as denominator. Throws if f is not
// finite.
GradCheckResult grad_check(const std::function<Var()>& f, const ParamStore& params, double h = 1e-5);
double grad_check(const std::function<Var(const Var&)>& f, const Tensor& theta, double h = 1e-5);

// Checkpoint layout: "MMLY1", uint64 little-endian header length, JSON header
// {"tensors":[{"name","shape","offset","count"}], "meta":{...}}, then the raw
// little-endian float64 payload. Offsets are bytes from the payload start.
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const nlohmann::json& meta);
// Loads values into an already-constructed store. Names and shapes must
// match exactly. Returns the meta object.
nlohmann::json load_checkpoint(const std::filesystem::path& path, ParamStore& params);
nlohmann::json read_checkpoint_meta(const std::filesystem::path& path);

}  // namespace mmlayout
