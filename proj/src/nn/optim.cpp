// SPDX-License-Identifier: Apache-2.0
#include "templink/nn/optim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "templink/error.hpp"
#include "templink/io.hpp"

namespace templink::nn {

void adam_step(ParameterStore& store, AdamState& state, const AdamConfig& cfg) {
  auto params = store.all();
  for (const Parameter* p : params) {
    for (double g : p->grad.values()) {
      if (!std::isfinite(g)) fail(ErrorCode::numeric_error, "non-finite gradient for parameter " + p->name);
    }
  }
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
    state.steps = 0;
  }
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    if (m.shape() != p.value.shape()) fail(ErrorCode::invalid_argument, "adam state shape mismatch for " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

namespace {

constexpr char kMagic[8] = {'T', 'L', 'C', 'K', 'P', 'T', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t get_u64(std::istream& in, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) fail(ErrorCode::parse_error, path.string() + ": truncated checkpoint");
  return v;
}

std::string get_string(std::istream& in, const std::filesystem::path& path) {
  const auto n = get_u64(in, path);
  if (n > (1u << 20)) fail(ErrorCode::parse_error, path.string() + ": corrupt checkpoint string");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) fail(ErrorCode::parse_error, path.string() + ": truncated checkpoint");
  return s;
}

}  // namespace

Checkpoint make_checkpoint(const ParameterStore& store, std::map<std::string, std::string> meta) {
  Checkpoint c;
  c.meta = std::move(meta);
  for (const Parameter* p : store.all()) c.tensors.emplace_back(p->name, p->value);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  auto out = open_output(path);
  out.write(kMagic, sizeof kMagic);
  put_u64(out, ckpt.meta.size());
  for (const auto& [k, v] : ckpt.meta) {
    put_string(out, k);
    put_string(out, v);
  }
  put_u64(out, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_string(out, name);
    put_u64(out, t.rank());
    for (auto d : t.shape()) put_u64(out, d);
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) fail(ErrorCode::io_error, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::parse_error, path.string() + ": not a checkpoint (bad magic)");
  }
  Checkpoint c;
  const auto metas = get_u64(in, path);
  for (std::uint64_t i = 0; i < metas; ++i) {
    auto k = get_string(in, path);
    c.meta[k] = get_string(in, path);
  }
  const auto count = get_u64(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name = get_string(in, path);
    const auto rank = get_u64(in, path);
    if (rank > 8) fail(ErrorCode::parse_error, path.string() + ": corrupt tensor rank");
    Shape shape(rank);
    for (auto& d : shape) d = get_u64(in, path);
    std::vector<double> values(shape_size(shape));
    if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)))) {
      fail(ErrorCode::parse_error, path.string() + ": truncated tensor " + name);
    }
    c.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return c;
}

void restore(ParameterStore& store, const Checkpoint& ckpt) {
  for (Parameter* p : store.all()) {
    bool found = false;
    for (const auto& [name, t] : ckpt.tensors) {
      if (name != p->name) continue;
      if (t.shape() != p->value.shape()) {
        fail(ErrorCode::invalid_argument, "checkpoint shape " + shape_string(t.shape()) + " for " + name +
                                              ", model expects " + shape_string(p->value.shape()));
      }
      p->value = t;
      found = true;
      break;
    }
    if (!found) fail(ErrorCode::invalid_argument, "checkpoint lacks parameter " + p->name);
  }
}

}  // namespace templink::nn
