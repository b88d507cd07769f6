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

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "mmlayout/tensor.hpp"

namespace mmlayout {

// Reverse-mode differentiation over a dynamically recorded graph.
//
// Every op returns a Var that keeps its inputs alive; Var::backward() walks
// the graph from the root in reverse topological order. Leaves created with
// Var::parameter accumulate gradient across backward calls until zero_grad.
// A graph must stay on one thread.

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  Tensor& grad_buffer();
};

class Var {
 public:
  Var() = default;

  static Var constant(Tensor value);
  static Var parameter(Tensor value);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  // Direct access for initialisation, optimisers and finite differences.
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  size_t rows() const { return node_->value.rows(); }
  size_t cols() const { return node_->value.cols(); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  // Empty tensor until a backward pass has reached this node.
  const Tensor& grad() const { return node_->grad; }
  void zero_grad();

  // Seeds d(root)/d(root) = 1; the root must hold exactly one element.
  void backward();

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

  // Internal: wraps a freshly computed value. If any input requires grad and
  // grad mode is on, `fn` is recorded for the backward pass.
  static Var make(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> fn);

 private:
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

namespace ops {

Var matmul(const Var& a, const Var& b);     // [m,k] x [k,n]
Var matmul_nt(const Var& a, const Var& b);  // [m,k] x [n,k]^T
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var add_row(const Var& a, const Var& bias);  // bias has a.cols() elements, broadcast over rows
Var scale(const Var& a, double s);
Var linear(const Var& x, const Var& weight, const Var& bias);  // x W + b

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(const Var& a, size_t start, size_t count);
Var slice_cols(const Var& a, size_t start, size_t count);

Var softmax_rows(const Var& a);
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-6);
Var gelu(const Var& x);
Var relu(const Var& x);
Var dropout(const Var& x, double p, std::mt19937_64& rng);

// out[i] = table[ids[i]]
Var gather_rows(const Var& table, std::span<const int> ids);
// out[index[i]] += x[i]; rows not hit stay zero
Var scatter_add_rows(const Var& x, std::span<const int> index, size_t out_rows);
// out[i,j] = table[bucket[i*n+j], column]
Var gather_bias(const Var& table, std::span<const int> bucket, size_t n, size_t column);

Var sum(const Var& a);

inline constexpr int kIgnoreIndex = -100;

// Mean negative log-softmax over rows whose target is not kIgnoreIndex.
// Throws ValidationError when every row is ignored.
Var cross_entropy(const Var& logits, std::span<const int> targets, int ignore_index = kIgnoreIndex);

}  // namespace ops

// Truncated normal (resampled beyond two standard deviations).
Tensor truncated_normal(const Shape& shape, double stddev, std::mt19937_64& rng);

}  // namespace mmlayout
