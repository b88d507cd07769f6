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

#include "mmlayout/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "mmlayout/error.hpp"

namespace mmlayout {
namespace {

thread_local bool g_grad_enabled = true;

void require_rank2(const Var& a, const char* op) {
  if (a.shape().size() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
  }
}

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

Node& in(Node& self, size_t k) { return *self.inputs[k]; }

}  // namespace

Tensor& Node::grad_buffer() {
  if (grad.empty() && !value.empty()) grad = Tensor(value.shape());
  if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  return grad;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_mode_enabled() { return g_grad_enabled; }

Var Var::constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

void Var::zero_grad() {
  if (node_ && !node_->grad.empty()) node_->grad.fill(0.0);
}

Var Var::make(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (!g_grad_enabled) return Var(std::move(n));
  bool any = false;
  for (const Var& v : inputs) any = any || v.requires_grad();
  if (!any) return Var(std::move(n));
  n->requires_grad = true;
  n->inputs.reserve(inputs.size());
  for (Var& v : inputs) n->inputs.push_back(v.node_);
  n->backward = std::move(fn);
  return Var(std::move(n));
}

void Var::backward() {
  if (!node_) throw ValidationError("backward on an undefined Var");
  if (node_->value.size() != 1) {
    throw ShapeError("backward needs a single-element root, got " + shape_string(node_->value.shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; deep graphs must not recurse.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.push_back({child, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward) n->grad = Tensor(n->value.shape());
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
  // Intermediate gradients are no longer needed; leaves keep theirs.
  for (Node* n : order) {
    if (n->backward && n != node_.get()) n->grad = Tensor();
  }
}

namespace ops {

Var matmul(const Var& a, const Var& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: inner dimensions disagree " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  Tensor out({m, n});
  kernels::gemm_nn(a.value().data(), b.value().data(), out.data(), m, k, n);
  return Var::make(std::move(out), {a, b}, [m, k, n](Node& self) {
    const Tensor& g = self.grad;
    Node& na = in(self, 0);
    Node& nb = in(self, 1);
    if (na.requires_grad) kernels::gemm_nt(g.data(), nb.value.data(), na.grad_buffer().data(), m, n, k);
    if (nb.requires_grad) kernels::gemm_tn(na.value.data(), g.data(), nb.grad_buffer().data(), m, k, n);
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  const size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw ShapeError("matmul_nt: inner dimensions disagree " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()) + "^T");
  }
  Tensor out({m, n});
  kernels::gemm_nt(a.value().data(), b.value().data(), out.data(), m, k, n);
  return Var::make(std::move(out), {a, b}, [m, k, n](Node& self) {
    const Tensor& g = self.grad;
    Node& na = in(self, 0);
    Node& nb = in(self, 1);
    if (na.requires_grad) kernels::gemm_nn(g.data(), nb.value.data(), na.grad_buffer().data(), m, n, k);
    if (nb.requires_grad) kernels::gemm_tn(g.data(), na.value.data(), nb.grad_buffer().data(), m, n, k);
  });
}

Var transpose(const Var& a) {
  require_rank2(a, "transpose");
  const size_t m = a.rows(), n = a.cols();
  Tensor out({n, m});
  const Tensor& x = a.value();
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) out.at(j, i) = x.at(i, j);
  return Var::make(std::move(out), {a}, [m, n](Node& self) {
    Tensor& ga = in(self, 0).grad_buffer();
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) ga.at(i, j) += self.grad.at(j, i);
  });
}

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  const Tensor& y = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    for (size_t k = 0; k < 2; ++k) {
      if (!in(self, k).requires_grad) continue;
      Tensor& g = in(self, k).grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  const Tensor& y = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    if (in(self, 0).requires_grad) {
      Tensor& g = in(self, 0).grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (in(self, 1).requires_grad) {
      Tensor& g = in(self, 1).grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  Tensor out = a.value();
  const Tensor& y = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    Node& na = in(self, 0);
    Node& nb = in(self, 1);
    if (na.requires_grad) {
      Tensor& g = na.grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * nb.value[i];
    }
    if (nb.requires_grad) {
      Tensor& g = nb.grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * na.value[i];
    }
  });
}

Var add_row(const Var& a, const Var& bias) {
  const size_t n = a.cols();
  if (bias.value().size() != n) {
    throw ShapeError("add_row: bias " + shape_string(bias.shape()) + " does not match " + shape_string(a.shape()));
  }
  Tensor out = a.value();
  const size_t m = out.rows();
  const double* b = bias.value().data();
  for (size_t i = 0; i < m; ++i) {
    double* r = out.data() + i * n;
    for (size_t j = 0; j < n; ++j) r[j] += b[j];
  }
  return Var::make(std::move(out), {a, bias}, [m, n](Node& self) {
    if (in(self, 0).requires_grad) {
      Tensor& g = in(self, 0).grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (in(self, 1).requires_grad) {
      Tensor& g = in(self, 1).grad_buffer();
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return Var::make(std::move(out), {a}, [s](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) { return add_row(matmul(x, weight), bias); }

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const size_t n = parts.front().cols();
  size_t m = 0;
  for (const Var& p : parts) {
    require_rank2(p, "concat_rows");
    if (p.cols() != n) throw ShapeError("concat_rows: column mismatch " + shape_string(p.shape()));
    m += p.rows();
  }
  Tensor out({m, n});
  size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + off);
    off += p.value().size();
  }
  return Var::make(std::move(out), {parts.begin(), parts.end()}, [](Node& self) {
    size_t off = 0;
    for (auto& input : self.inputs) {
      const size_t len = input->value.size();
      if (input->requires_grad) {
        Tensor& g = input->grad_buffer();
        for (size_t i = 0; i < len; ++i) g[i] += self.grad[off + i];
      }
      off += len;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const size_t m = parts.front().rows();
  size_t n = 0;
  for (const Var& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.rows() != m) throw ShapeError("concat_cols: row mismatch " + shape_string(p.shape()));
    n += p.cols();
  }
  Tensor out({m, n});
  size_t c0 = 0;
  for (const Var& p : parts) {
    const size_t pc = p.cols();
    for (size_t i = 0; i < m; ++i) std::copy_n(p.value().data() + i * pc, pc, out.data() + i * n + c0);
    c0 += pc;
  }
  return Var::make(std::move(out), {parts.begin(), parts.end()}, [m, n](Node& self) {
    size_t c0 = 0;
    for (auto& input : self.inputs) {
      const size_t pc = input->value.cols();
      if (input->requires_grad) {
        Tensor& g = input->grad_buffer();
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < pc; ++j) g[i * pc + j] += self.grad[i * n + c0 + j];
      }
      c0 += pc;
    }
  });
}

Var slice_rows(const Var& a, size_t start, size_t count) {
  require_rank2(a, "slice_rows");
  if (start + count > a.rows()) throw ShapeError("slice_rows out of range for " + shape_string(a.shape()));
  const size_t n = a.cols();
  Tensor out({count, n});
  std::copy_n(a.value().data() + start * n, count * n, out.data());
  return Var::make(std::move(out), {a}, [start, n](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < self.grad.size(); ++i) g[start * n + i] += self.grad[i];
  });
}

Var slice_cols(const Var& a, size_t start, size_t count) {
  require_rank2(a, "slice_cols");
  if (start + count > a.cols()) throw ShapeError("slice_cols out of range for " + shape_string(a.shape()));
  const size_t m = a.rows(), n = a.cols();
  Tensor out({m, count});
  for (size_t i = 0; i < m; ++i) std::copy_n(a.value().data() + i * n + start, count, out.data() + i * count);
  return Var::make(std::move(out), {a}, [m, n, start, count](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < count; ++j) g[i * n + start + j] += self.grad[i * count + j];
  });
}

Var softmax_rows(const Var& a) {
  const size_t n = a.cols();
  if (n == 0) throw ShapeError("softmax over an empty axis");
  Tensor out = a.value();
  const size_t m = out.rows();
  for (size_t i = 0; i < m; ++i) {
    double* r = out.data() + i * n;
    const double mx = *std::max_element(r, r + n);
    double z = 0;
    for (size_t j = 0; j < n; ++j) {
      r[j] = std::exp(r[j] - mx);
      z += r[j];
    }
    const double inv = 1.0 / z;
    for (size_t j = 0; j < n; ++j) r[j] *= inv;
  }
  return Var::make(std::move(out), {a}, [m, n](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < m; ++i) {
      const double* y = self.value.data() + i * n;
      const double* dy = self.grad.data() + i * n;
      double dot = 0;
      for (size_t j = 0; j < n; ++j) dot += dy[j] * y[j];
      double* gx = g.data() + i * n;
      for (size_t j = 0; j < n; ++j) gx[j] += y[j] * (dy[j] - dot);
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const size_t n = x.cols();
  if (gain.value().size() != n || bias.value().size() != n) {
    throw ShapeError("layer_norm: affine parameters do not match " + shape_string(x.shape()));
  }
  const size_t m = x.rows();
  Tensor out(x.shape());
  auto xhat = std::make_shared<Tensor>(x.shape());
  auto inv_std = std::make_shared<std::vector<double>>(m);
  const double* g = gain.value().data();
  const double* b = bias.value().data();
  for (size_t i = 0; i < m; ++i) {
    const double* r = x.value().data() + i * n;
    double mu = 0;
    for (size_t j = 0; j < n; ++j) mu += r[j];
    mu /= static_cast<double>(n);
    double var = 0;
    for (size_t j = 0; j < n; ++j) var += (r[j] - mu) * (r[j] - mu);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    double* h = xhat->data() + i * n;
    double* o = out.data() + i * n;
    for (size_t j = 0; j < n; ++j) {
      h[j] = (r[j] - mu) * is;
      o[j] = g[j] * h[j] + b[j];
    }
  }
  return Var::make(std::move(out), {x, gain, bias}, [m, n, xhat, inv_std](Node& self) {
    Node& nx = in(self, 0);
    Node& ng = in(self, 1);
    Node& nb = in(self, 2);
    const double* g = ng.value.data();
    if (ng.requires_grad) {
      Tensor& gg = ng.grad_buffer();
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) gg[j] += self.grad[i * n + j] * (*xhat)[i * n + j];
    }
    if (nb.requires_grad) {
      Tensor& gb = nb.grad_buffer();
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) gb[j] += self.grad[i * n + j];
    }
    if (nx.requires_grad) {
      Tensor& gx = nx.grad_buffer();
      std::vector<double> dh(n);
      for (size_t i = 0; i < m; ++i) {
        const double* h = xhat->data() + i * n;
        double mean_dh = 0, mean_dh_h = 0;
        for (size_t j = 0; j < n; ++j) {
          dh[j] = self.grad[i * n + j] * g[j];
          mean_dh += dh[j];
          mean_dh_h += dh[j] * h[j];
        }
        mean_dh /= static_cast<double>(n);
        mean_dh_h /= static_cast<double>(n);
        const double is = (*inv_std)[i];
        for (size_t j = 0; j < n; ++j) gx[i * n + j] += is * (dh[j] - mean_dh - h[j] * mean_dh_h);
      }
    }
  });
}

Var gelu(const Var& x) {
  Tensor out = x.value();
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = out[i];
    out[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
  return Var::make(std::move(out), {x}, [](Node& self) {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    Node& nx = in(self, 0);
    Tensor& g = nx.grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) {
      const double v = nx.value[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      g[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], 0.0);
  return Var::make(std::move(out), {x}, [](Node& self) {
    Node& nx = in(self, 0);
    Tensor& g = nx.grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) {
      if (nx.value[i] > 0) g[i] += self.grad[i];
    }
  });
}

Var dropout(const Var& x, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw ValidationError("dropout probability must be < 1");
  auto mask = std::make_shared<std::vector<double>>(x.value().size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 / (1.0 - p);
  Tensor out = x.value();
  for (size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = u(rng) < p ? 0.0 : keep;
    out[i] *= (*mask)[i];
  }
  return Var::make(std::move(out), {x}, [mask](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*mask)[i];
  });
}

Var gather_rows(const Var& table, std::span<const int> ids) {
  require_rank2(table, "gather_rows");
  const size_t n = table.cols();
  const size_t vocab = table.rows();
  std::vector<int> idx(ids.begin(), ids.end());
  Tensor out({idx.size(), n});
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<size_t>(idx[i]) >= vocab) {
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) + " outside table " +
                       shape_string(table.shape()));
    }
    std::copy_n(table.value().data() + idx[i] * n, n, out.data() + i * n);
  }
  return Var::make(std::move(out), {table}, [idx = std::move(idx), n](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < idx.size(); ++i) {
      double* dst = g.data() + idx[i] * n;
      const double* src = self.grad.data() + i * n;
      for (size_t j = 0; j < n; ++j) dst[j] += src[j];
    }
  });
}

Var scatter_add_rows(const Var& x, std::span<const int> index, size_t out_rows) {
  require_rank2(x, "scatter_add_rows");
  if (index.size() != x.rows()) throw ShapeError("scatter_add_rows: index length does not match rows");
  const size_t n = x.cols();
  std::vector<int> idx(index.begin(), index.end());
  Tensor out({out_rows, n});
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<size_t>(idx[i]) >= out_rows) {
      throw ShapeError("scatter_add_rows: target " + std::to_string(idx[i]) + " out of range");
    }
    double* dst = out.data() + idx[i] * n;
    const double* src = x.value().data() + i * n;
    for (size_t j = 0; j < n; ++j) dst[j] += src[j];
  }
  return Var::make(std::move(out), {x}, [idx = std::move(idx), n](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < idx.size(); ++i) {
      const double* src = self.grad.data() + idx[i] * n;
      double* dst = g.data() + i * n;
      for (size_t j = 0; j < n; ++j) dst[j] += src[j];
    }
  });
}

Var gather_bias(const Var& table, std::span<const int> bucket, size_t n, size_t column) {
  require_rank2(table, "gather_bias");
  if (bucket.size() != n * n) throw ShapeError("gather_bias: bucket matrix must be n*n");
  if (column >= table.cols()) throw ShapeError("gather_bias: column out of range");
  const size_t cols = table.cols();
  Tensor out({n, n});
  for (size_t i = 0; i < n * n; ++i) {
    if (bucket[i] < 0 || static_cast<size_t>(bucket[i]) >= table.rows()) {
      throw ShapeError("gather_bias: bucket out of range");
    }
    out[i] = table.value()[bucket[i] * cols + column];
  }
  std::vector<int> b(bucket.begin(), bucket.end());
  return Var::make(std::move(out), {table}, [b = std::move(b), cols, column](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < b.size(); ++i) g[b[i] * cols + column] += self.grad[i];
  });
}

Var sum(const Var& a) {
  double s = 0;
  for (size_t i = 0; i < a.value().size(); ++i) s += a.value()[i];
  return Var::make(Tensor::scalar(s), {a}, [](Node& self) {
    Tensor& g = in(self, 0).grad_buffer();
    for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0];
  });
}

Var cross_entropy(const Var& logits, std::span<const int> targets, int ignore_index) {
  require_rank2(logits, "cross_entropy");
  const size_t m = logits.rows(), c = logits.cols();
  if (targets.size() != m) throw ShapeError("cross_entropy: one target per row required");
  auto probs = std::make_shared<Tensor>(logits.shape());
  std::vector<int> tgt(targets.begin(), targets.end());
  size_t count = 0;
  double loss = 0;
  for (size_t i = 0; i < m; ++i) {
    const double* r = logits.value().data() + i * c;
    const double mx = *std::max_element(r, r + c);
    double z = 0;
    for (size_t j = 0; j < c; ++j) z += std::exp(r[j] - mx);
    const double lse = mx + std::log(z);
    for (size_t j = 0; j < c; ++j) probs->at(i, j) = std::exp(r[j] - lse);
    if (tgt[i] == ignore_index) continue;
    if (tgt[i] < 0 || static_cast<size_t>(tgt[i]) >= c) {
      throw ValidationError("cross_entropy: target " + std::to_string(tgt[i]) + " outside [0," +
                            std::to_string(c) + ")");
    }
    loss += lse - r[tgt[i]];
    ++count;
  }
  if (count == 0) throw ValidationError("cross_entropy: every position is ignored");
  loss /= static_cast<double>(count);
  return Var::make(Tensor::scalar(loss), {logits},
                   [probs, tgt = std::move(tgt), count, c, ignore_index](Node& self) {
                     Tensor& g = in(self, 0).grad_buffer();
                     const double s = self.grad[0] / static_cast<double>(count);
                     for (size_t i = 0; i < tgt.size(); ++i) {
                       if (tgt[i] == ignore_index) continue;
                       for (size_t j = 0; j < c; ++j) g.at(i, j) += s * probs->at(i, j);
                       g.at(i, tgt[i]) -= s;
                     }
                   });
}

}  // namespace ops

Tensor truncated_normal(const Shape& shape, double stddev, std::mt19937_64& rng) {
  Tensor t(shape);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (size_t i = 0; i < t.size(); ++i) {
    double v;
    do {
      v = dist(rng);
    } while (std::abs(v) > 2.0);
    t[i] = v * stddev;
  }
  return t;
}

}  // namespace mmlayout
