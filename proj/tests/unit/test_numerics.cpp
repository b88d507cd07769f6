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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "mmlayout/autodiff.hpp"
#include "mmlayout/error.hpp"
#include "mmlayout/optim.hpp"
#include "mmlayout/tensor.hpp"
#include "reference.hpp"

using namespace mmlayout;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) t[i] = n(rng);
  return t;
}

// Random projection to a scalar, so every output element matters.
Var project(const Var& y, std::mt19937_64& rng) {
  return ops::sum(ops::mul(y, Var::constant(random_tensor(y.shape(), rng))));
}

}  // namespace

TEST_CASE("matmul fixtures and oracle") {
  const Var id = Var::constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  const Var v = Var::constant(Tensor::matrix(2, 1, {3, -2}));
  CHECK(max_abs_diff(ops::matmul(id, v).value(), v.value()) == 0.0);
  const Var a = Var::constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  const Var ones = Var::constant(Tensor::matrix(2, 1, {1, 1}));
  CHECK(max_abs_diff(ops::matmul(a, ones).value(), Tensor::matrix(2, 1, {3, 7})) == 0.0);

  std::mt19937_64 rng(1);
  const Tensor x = random_tensor({5, 4}, rng), y = random_tensor({4, 3}, rng);
  const Tensor got = ops::matmul(Var::constant(x), Var::constant(y)).value();
  CHECK(ref::max_diff(ref::matmul(ref::to_mat(x), ref::to_mat(y)), got) < 1e-12);
  CHECK_THROWS_AS(ops::matmul(Var::constant(x), Var::constant(x)), ShapeError);
}

TEST_CASE("shape errors name both shapes") {
  const Var a = Var::constant(Tensor({2, 3}));
  const Var b = Var::constant(Tensor({2, 2}));
  try {
    ops::matmul(a, b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    CHECK(what.find("[2,3]") != std::string::npos);
    CHECK(what.find("[2,2]") != std::string::npos);
  }
}

TEST_CASE("softmax") {
  const Tensor s = ops::softmax_rows(Var::constant(Tensor::matrix(1, 2, {0, 0}))).value();
  CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-15));
  const Tensor t = ops::softmax_rows(Var::constant(Tensor::matrix(1, 2, {std::log(3.0), 0}))).value();
  CHECK(std::abs(t[0] - 0.75) < 1e-15);
  CHECK(std::abs(t[1] - 0.25) < 1e-15);

  std::mt19937_64 rng(2);
  Tensor x = random_tensor({6, 9}, rng, 50);
  // on a 2^-40 grid the shift below is exact, so the output must not move
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::ldexp(std::round(std::ldexp(x[i], 40)), -40);
  const Tensor p = ops::softmax_rows(Var::constant(x)).value();
  for (size_t r = 0; r < 6; ++r) {
    double sum = 0;
    for (double v : p.row(r)) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  for (size_t i = 0; i < x.size(); ++i) x[i] += 1024;
  CHECK(max_abs_diff(ops::softmax_rows(Var::constant(x)).value(), p) == 0.0);
}

TEST_CASE("layer norm") {
  const Var gain = Var::constant(Tensor({2}, 1.0));
  const Var bias = Var::constant(Tensor({2}));
  const Tensor flat = ops::layer_norm(Var::constant(Tensor::matrix(1, 2, {4, 4})), gain, bias).value();
  CHECK(flat[0] == 0.0);
  CHECK(flat[1] == 0.0);
  const Tensor unit = ops::layer_norm(Var::constant(Tensor::matrix(1, 2, {1, -1})), gain, bias).value();
  CHECK(std::abs(unit[0] - 1.0) < 1e-5);
  CHECK(std::abs(unit[1] + 1.0) < 1e-5);

  std::mt19937_64 rng(3);
  const Var g = Var::constant(Tensor({16}, 1.0));
  const Var b = Var::constant(Tensor({16}));
  const Tensor y = ops::layer_norm(Var::constant(random_tensor({1, 16}, rng, 3)), g, b).value();
  double mean = 0, var = 0;
  for (size_t i = 0; i < 16; ++i) mean += y[i] / 16;
  for (size_t i = 0; i < 16; ++i) var += (y[i] - mean) * (y[i] - mean) / 16;
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(var - 1.0) < 1e-4);
}

TEST_CASE("cross entropy") {
  const int all[] = {0, 1, 2};
  const Var uniform = Var::constant(Tensor({3, 4}));
  CHECK(std::abs(ops::cross_entropy(uniform, all).value()[0] - std::log(4.0)) < 1e-12);

  const Var sharp = Var::constant(Tensor::matrix(1, 3, {0, 200, 0}));
  const int one[] = {1};
  CHECK(ops::cross_entropy(sharp, one).value()[0] < 1e-12);

  // Ignored rows do not count.
  const Var mixed = Var::constant(Tensor::matrix(2, 2, {0, 0, 5, -5}));
  const int half[] = {0, ops::kIgnoreIndex};
  CHECK(std::abs(ops::cross_entropy(mixed, half).value()[0] - std::log(2.0)) < 1e-12);
  const int none[] = {ops::kIgnoreIndex, ops::kIgnoreIndex};
  CHECK_THROWS_AS(ops::cross_entropy(mixed, none), ValidationError);
}

TEST_CASE("theta squared") {
  const double err = grad_check([](const Var& t) { return ops::sum(ops::mul(t, t)); }, Tensor::scalar(3.0));
  CHECK(err < 1e-8);
  // analytic gradient itself
  Var t = Var::parameter(Tensor::scalar(3.0));
  ops::sum(ops::mul(t, t)).backward();
  CHECK(t.grad()[0] == 6.0);
}

TEST_CASE("every differentiable op passes a gradient check") {
  std::mt19937_64 rng(42);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({4, 5}, rng);
  const Tensor c = random_tensor({3, 4}, rng);
  const Tensor row = random_tensor({4}, rng);
  const Tensor table = random_tensor({6, 3}, rng);
  const Tensor sq = random_tensor({4, 4}, rng);

  struct Case {
    const char* name;
    std::function<Var(const Var&)> f;
    Tensor theta;
  };
  std::vector<Case> cases = {
      {"matmul", [&](const Var& t) { return project(ops::matmul(t, Var::constant(b)), rng); }, a},
      {"matmul rhs", [&](const Var& t) { return project(ops::matmul(Var::constant(a), t), rng); }, b},
      {"matmul_nt", [&](const Var& t) { return project(ops::matmul_nt(t, Var::constant(c)), rng); }, a},
      {"transpose", [&](const Var& t) { return project(ops::transpose(t), rng); }, a},
      {"add", [&](const Var& t) { return project(ops::add(t, Var::constant(c)), rng); }, a},
      {"sub", [&](const Var& t) { return project(ops::sub(Var::constant(c), t), rng); }, a},
      {"mul", [&](const Var& t) { return project(ops::mul(t, Var::constant(c)), rng); }, a},
      {"add_row", [&](const Var& t) { return project(ops::add_row(Var::constant(a), t), rng); }, row},
      {"scale", [&](const Var& t) { return project(ops::scale(t, -1.7), rng); }, a},
      {"linear bias", [&](const Var& t) { return project(ops::linear(Var::constant(a), Var::constant(sq), t), rng); }, row},
      {"concat_rows", [&](const Var& t) { const Var p[] = {t, Var::constant(c), t}; return project(ops::concat_rows(p), rng); }, a},
      {"concat_cols", [&](const Var& t) { const Var p[] = {Var::constant(c), t}; return project(ops::concat_cols(p), rng); }, a},
      {"slice_rows", [&](const Var& t) { return project(ops::slice_rows(t, 1, 2), rng); }, a},
      {"slice_cols", [&](const Var& t) { return project(ops::slice_cols(t, 1, 2), rng); }, a},
      {"softmax", [&](const Var& t) { return project(ops::softmax_rows(t), rng); }, a},
      {"layer_norm x", [&](const Var& t) { return project(ops::layer_norm(t, Var::constant(row), Var::constant(row)), rng); }, a},
      {"layer_norm gain", [&](const Var& t) { return project(ops::layer_norm(Var::constant(a), t, Var::constant(row)), rng); }, row},
      {"gelu", [&](const Var& t) { return project(ops::gelu(t), rng); }, a},
      {"relu", [&](const Var& t) { return project(ops::relu(t), rng); }, a},
      {"gather_rows", [&](const Var& t) { const int ids[] = {4, 0, 4, 2}; return project(ops::gather_rows(t, ids), rng); }, table},
      {"scatter_add_rows", [&](const Var& t) { const int idx[] = {1, 1, 0}; return project(ops::scatter_add_rows(t, idx, 3), rng); }, a},
      {"gather_bias", [&](const Var& t) { const int bucket[] = {0, 5, 2, 2, 1, 5, 3, 0, 4}; return project(ops::gather_bias(t, bucket, 3, 1), rng); }, table},
      {"sum", [&](const Var& t) { return ops::sum(ops::mul(t, t)); }, a},
  };
  for (auto& cs : cases) {
    // Draw the projection once so f is the same function at every probe.
    std::mt19937_64 fixed(99);
    auto f = [&](const Var& t) {
      rng = fixed;
      return cs.f(t);
    };
    CAPTURE(cs.name);
    CHECK(grad_check(f, cs.theta) < 1e-6);
  }

  SUBCASE("softmax cross entropy composite") {
    const int targets[] = {2, ops::kIgnoreIndex, 0};
    const Tensor logits = random_tensor({3, 4}, rng, 2);
    CHECK(grad_check([&](const Var& t) { return ops::cross_entropy(t, targets); }, logits) < 1e-6);
  }
}

TEST_CASE("grad check rejects non finite functions") {
  CHECK_THROWS(grad_check([](const Var& t) { return ops::scale(ops::sum(t), INFINITY); }, Tensor::scalar(1.0)));
}

TEST_CASE("parameters accumulate gradient until zeroed") {
  ParamStore store;
  Var w = store.add("w", Tensor::matrix(1, 2, {1, 2}));
  ops::sum(ops::scale(w, 3.0)).backward();
  ops::sum(ops::scale(w, 3.0)).backward();
  CHECK(w.grad()[0] == 6.0);
  store.zero_grad();
  CHECK((w.grad().empty() || w.grad()[0] == 0.0));
  {
    NoGradGuard guard;
    Var y = ops::scale(w, 2.0);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(grad_mode_enabled());
}

TEST_CASE("adam") {
  SUBCASE("first step moves by about lr") {
    ParamStore store;
    Var p = store.add("p", Tensor::scalar(1.0));
    ops::sum(ops::scale(p, 0.3)).backward();
    AdamState state;
    adam_step(store, state, 0.01, {});
    CHECK(std::abs((1.0 - p.value()[0]) - 0.01 * 0.3 / (0.3 + 1e-8)) < 1e-12);
    CHECK(state.step == 1);
  }
  SUBCASE("zero gradient, zero decay leaves parameters alone") {
    ParamStore store;
    Var p = store.add("p", Tensor::matrix(1, 2, {1.5, -2}));
    ops::sum(ops::scale(p, 0.0)).backward();
    AdamState state;
    adam_step(store, state, 0.1, {});
    CHECK(p.value()[0] == 1.5);
    CHECK(p.value()[1] == -2.0);
  }
  SUBCASE("decoupled decay skips flagged parameters") {
    ParamStore store;
    Var w = store.add("w", Tensor::scalar(2.0), true);
    Var b = store.add("b", Tensor::scalar(2.0), false);
    AdamState state;
    AdamConfig cfg;
    cfg.weight_decay = 0.5;
    adam_step(store, state, 0.1, cfg);
    CHECK(std::abs(w.value()[0] - (2.0 - 0.1 * 0.5 * 2.0)) < 1e-15);
    CHECK(b.value()[0] == 2.0);
  }
  SUBCASE("identical runs are bitwise identical") {
    auto run = [] {
      std::mt19937_64 rng(5);
      ParamStore store;
      Var w = store.add("w", truncated_normal({4, 3}, 0.5, rng));
      const Var x = Var::constant(random_tensor({2, 4}, rng));
      AdamState state;
      AdamConfig cfg;
      cfg.weight_decay = 0.01;
      for (int i = 0; i < 20; ++i) {
        store.zero_grad();
        Var y = ops::matmul(x, w);
        ops::sum(ops::mul(y, y)).backward();
        adam_step(store, state, 0.05, cfg);
      }
      return w.value().storage();
    };
    CHECK(run() == run());
  }
}

TEST_CASE("clipping never increases the norm") {
  std::mt19937_64 rng(8);
  for (double limit : {0.1, 1.0, 100.0}) {
    ParamStore store;
    Var w = store.add("w", random_tensor({3, 3}, rng));
    ops::sum(ops::mul(w, Var::constant(random_tensor({3, 3}, rng, 4)))).backward();
    const double before = store.grad_norm();
    CHECK(clip_grad_norm(store, limit) == doctest::Approx(before));
    CHECK(store.grad_norm() <= std::min(before, limit) * (1 + 1e-12));
  }
}

TEST_CASE("truncated normal stays within two standard deviations") {
  std::mt19937_64 rng(9);
  const Tensor t = truncated_normal({1000}, 0.02, rng);
  for (size_t i = 0; i < t.size(); ++i) CHECK(std::abs(t[i]) <= 0.04);
}

TEST_CASE("checkpoint round trip is bit exact") {
  std::mt19937_64 rng(10);
  ParamStore a;
  a.add("x", random_tensor({3, 5}, rng));
  a.add("y", random_tensor({7}, rng), false);
  a.entries()[0].var.mutable_value()[2] = -0.0;
  a.entries()[0].var.mutable_value()[3] = 1e-310;
  const auto path = std::filesystem::temp_directory_path() / "mmlayout_numerics.ckpt";
  save_checkpoint(path, a, {{"note", "hello"}});

  ParamStore b;
  b.add("x", Tensor({3, 5}));
  b.add("y", Tensor({7}), false);
  const auto meta = load_checkpoint(path, b);
  CHECK(meta["note"] == "hello");
  CHECK(read_checkpoint_meta(path)["note"] == "hello");
  for (size_t k = 0; k < 2; ++k) {
    const Tensor& x = a.entries()[k].var.value();
    const Tensor& y = b.entries()[k].var.value();
    CHECK(std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  }

  ParamStore wrong;
  wrong.add("x", Tensor({5, 3}));
  wrong.add("y", Tensor({7}), false);
  CHECK_THROWS_AS(load_checkpoint(path, wrong), ValidationError);

  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "NOPE";
  }
  CHECK_THROWS_AS(read_checkpoint_meta(path), ValidationError);
  std::filesystem::remove(path);
}
