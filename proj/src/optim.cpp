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

#include "mmlayout/optim.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mmlayout/error.hpp"

namespace mmlayout {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {
constexpr char kMagic[5] = {'M', 'M', 'L', 'Y', '1'};
}

Var ParamStore::add(const std::string& name, Tensor init, bool decay) {
  for (const Entry& e : entries_) {
    if (e.name == name) throw ValidationError("duplicate parameter name " + name);
  }
  Var v = Var::parameter(std::move(init));
  entries_.push_back({name, v, decay});
  return v;
}

const ParamStore::Entry& ParamStore::find(const std::string& name) const {
  for (const Entry& e : entries_) {
    if (e.name == name) return e;
  }
  throw ValidationError("unknown parameter " + name);
}

size_t ParamStore::scalar_count() const {
  size_t n = 0;
  for (const Entry& e : entries_) n += e.var.value().size();
  return n;
}

void ParamStore::zero_grad() {
  for (Entry& e : entries_) e.var.zero_grad();
}

double ParamStore::grad_norm() const {
  double s = 0;
  for (const Entry& e : entries_) {
    const Tensor& g = e.var.grad();
    for (size_t i = 0; i < g.size(); ++i) s += g[i] * g[i];
  }
  return std::sqrt(s);
}

std::vector<Tensor> ParamStore::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) out.push_back(e.var.value());
  return out;
}

void ParamStore::restore(const std::vector<Tensor>& values) {
  if (values.size() != entries_.size()) throw ValidationError("snapshot does not match parameter count");
  for (size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(entries_[i].var.value())) throw ShapeError("snapshot shape mismatch for " + entries_[i].name);
    entries_[i].var.mutable_value() = values[i];
  }
}

void adam_step(ParamStore& params, AdamState& state, double lr, const AdamConfig& cfg) {
  auto& entries = params.entries();
  if (state.m.empty()) {
    for (const auto& e : entries) {
      state.m.emplace_back(e.var.value().shape());
      state.v.emplace_back(e.var.value().shape());
    }
  }
  if (state.m.size() != entries.size()) throw ShapeError("optimizer state does not match parameters");
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (size_t k = 0; k < entries.size(); ++k) {
    Tensor& p = entries[k].var.mutable_value();
    const Tensor& g = entries[k].var.grad();
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    if (!m.same_shape(p)) throw ShapeError("optimizer moment shape mismatch for " + entries[k].name);
    const bool has_grad = !g.empty();
    if (has_grad && !g.same_shape(p)) throw ShapeError("gradient shape mismatch for " + entries[k].name);
    const double wd = entries[k].decay ? cfg.weight_decay : 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      const double gi = has_grad ? g[i] : 0.0;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.eps) + wd * p[i]);
    }
  }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  const double norm = params.grad_norm();
  if (max_norm > 0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& e : params.entries()) {
      Tensor& g = e.var.node()->grad;
      for (size_t i = 0; i < g.size(); ++i) g[i] *= s;
    }
  }
  return norm;
}

GradCheckResult grad_check(const std::function<Var()>& f, const ParamStore& params, double h) {
  auto eval = [&f]() {
    NoGradGuard guard;
    const double v = f().value()[0];
    if (!std::isfinite(v)) throw ValidationError("grad_check: function value is not finite");
    return v;
  };

  for (const auto& e : params.entries()) {
    Var v = e.var;
    v.zero_grad();
  }
  Var out = f();
  if (!std::isfinite(out.value()[0])) throw ValidationError("grad_check: function value is not finite");
  out.backward();

  GradCheckResult res;
  for (const auto& e : params.entries()) {
    Var v = e.var;
    const Tensor analytic = v.grad().empty() ? Tensor(v.shape()) : v.grad();
    Tensor& x = v.mutable_value();
    for (size_t i = 0; i < x.size(); ++i) {
      const double orig = x[i];
      x[i] = orig + h;
      const double fp = eval();
      x[i] = orig - h;
      const double fm = eval();
      x[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic[i] - numeric) / denom;
      ++res.checked;
      if (err > res.max_rel_error) {
        res.max_rel_error = err;
        res.worst_param = e.name;
        res.worst_index = i;
        res.analytic = analytic[i];
        res.numeric = numeric;
      }
    }
  }
  return res;
}

double grad_check(const std::function<Var(const Var&)>& f, const Tensor& theta, double h) {
  ParamStore store;
  Var p = store.add("theta", theta);
  return grad_check([&f, p]() { return f(p); }, store, h).max_rel_error;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const nlohmann::json& meta) {
  nlohmann::json header;
  header["tensors"] = nlohmann::json::array();
  size_t offset = 0;
  for (const auto& e : params.entries()) {
    const Tensor& t = e.var.value();
    header["tensors"].push_back({{"name", e.name}, {"shape", t.shape()}, {"offset", offset}, {"count", t.size()}});
    offset += t.size() * sizeof(double);
  }
  header["meta"] = meta;
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& e : params.entries()) {
    const Tensor& t = e.var.value();
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw ValidationError("failed writing checkpoint " + path.string());
}

namespace {

nlohmann::json read_header(std::ifstream& in, const std::filesystem::path& path) {
  char magic[5];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("not a checkpoint (bad magic): " + path.string());
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ull << 32)) throw ValidationError("corrupt checkpoint header: " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ValidationError("truncated checkpoint header: " + path.string());
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("corrupt checkpoint header JSON: " + std::string(e.what()));
  }
}

}  // namespace

nlohmann::json read_checkpoint_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  return read_header(in, path).value("meta", nlohmann::json::object());
}

nlohmann::json load_checkpoint(const std::filesystem::path& path, ParamStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  const nlohmann::json header = read_header(in, path);
  const std::streamoff payload_start = in.tellg();
  const auto& tensors = header.at("tensors");
  if (tensors.size() != params.size()) {
    throw ValidationError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                          std::to_string(params.size()));
  }
  for (size_t k = 0; k < tensors.size(); ++k) {
    auto& entry = params.entries()[k];
    const auto& t = tensors[k];
    if (t.at("name").get<std::string>() != entry.name) {
      throw ValidationError("checkpoint tensor " + t.at("name").get<std::string>() + " where " + entry.name +
                            " expected");
    }
    const Shape shape = t.at("shape").get<Shape>();
    if (shape != entry.var.shape()) {
      throw ShapeError("checkpoint shape " + shape_string(shape) + " for " + entry.name + ", model has " +
                       shape_string(entry.var.shape()));
    }
    Tensor& dst = entry.var.mutable_value();
    in.seekg(payload_start + static_cast<std::streamoff>(t.at("offset").get<size_t>()));
    in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size() * sizeof(double)));
    if (!in) throw ValidationError("truncated checkpoint payload for " + entry.name);
  }
  return header.value("meta", nlohmann::json::object());
}

}  // namespace mmlayout
