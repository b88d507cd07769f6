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

#include "mmlayout/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmlayout/error.hpp"

namespace mmlayout {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

size_t shape_size(const Shape& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

Tensor Tensor::matrix(size_t rows, size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("max_abs_diff: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace kernels {

void gemm_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (size_t p = 0; p < k; ++p) {
      const double s = ai[p];
      if (s == 0.0) continue;
      const double* bp = b + p * n;
      for (size_t j = 0; j < n; ++j) ci[j] += s * bp[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
      size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        s0 += ai[p] * bj[p];
        s1 += ai[p + 1] * bj[p + 1];
        s2 += ai[p + 2] * bj[p + 2];
        s3 += ai[p + 3] * bj[p + 3];
      }
      for (; p < k; ++p) s0 += ai[p] * bj[p];
      ci[j] += (s0 + s1) + (s2 + s3);
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * n;
    for (size_t p = 0; p < k; ++p) {
      const double s = ai[p];
      if (s == 0.0) continue;
      double* cp = c + p * n;
      for (size_t j = 0; j < n; ++j) cp[j] += s * bi[j];
    }
  }
}

}  // namespace kernels
}  // namespace mmlayout
