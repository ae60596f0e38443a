// SPDX-License-Identifier: Apache-2.0
#include "templink/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include "templink/error.hpp"
#include "templink/nn/kernels.hpp"

namespace templink::nn {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  fail(ErrorCode::invalid_argument,
       std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

void add_into(Tensor& dst, const Tensor& src) {
  kernels::active().axpy(src.size(), 1.0, src.data(), dst.data());
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  fail(ErrorCode::config_error, "unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) shape_error("matmul", av.shape(), bv.shape());
  Tensor out({m, n});
  kernels::active().gemm(m, k, n, av.data(), bv.data(), out.data());
  return t.record(std::move(out), {a, b}, [a, b, m, k, n](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(a)) {
      kernels::active().gemm_nt(m, n, k, g.data(), tp.value(b).data(), tp.grad(a).data());
    }
    if (tp.requires_grad(b)) {
      kernels::active().gemm_tn(m, k, n, tp.value(a).data(), g.data(), tp.grad(b).data());
    }
  });
}

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.size() != bv.size()) shape_error("add", av.shape(), bv.shape());
  Tensor out = av;
  add_into(out, bv);
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(a)) add_into(tp.grad(a), g);
    if (tp.requires_grad(b)) add_into(tp.grad(b), g);
  });
}

Var sub(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.size() != bv.size()) shape_error("sub", av.shape(), bv.shape());
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(a)) add_into(tp.grad(a), g);
    if (tp.requires_grad(b)) kernels::active().axpy(g.size(), -1.0, g.data(), tp.grad(b).data());
  });
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.size() != bv.size()) shape_error("mul", av.shape(), bv.shape());
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(a)) {
      auto& ga = tp.grad(a);
      const auto& bv = tp.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad(b);
      const auto& av = tp.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var one_minus(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values()) v = 1.0 - v;
  return a.tape->record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) {
    kernels::active().axpy(g.size(), -1.0, g.data(), tp.grad(a).data());
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.values()) v *= factor;
  return a.tape->record(std::move(out), {a}, [a, factor](Tape& tp, const Tensor& g) {
    kernels::active().axpy(g.size(), factor, g.data(), tp.grad(a).data());
  });
}

Var add_bias(Var a, Var bias) {
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  const std::size_t m = av.rows(), n = av.cols();
  if (bv.size() != n) shape_error("add_bias", av.shape(), bv.shape());
  Tensor out = av;
  for (std::size_t i = 0; i < m; ++i) {
    double* r = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) r[j] += bv[j];
  }
  return a.tape->record(std::move(out), {a, bias}, [a, bias, m, n](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(a)) add_into(tp.grad(a), g);
    if (tp.requires_grad(bias)) {
      auto& gb = tp.grad(bias);
      for (std::size_t i = 0; i < m; ++i) {
        const double* r = g.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) gb[j] += r[j];
      }
    }
  });
}

Var activate(Var a, Activation act) {
  if (act == Activation::identity) return a;
  Tensor out = a.value();
  switch (act) {
    case Activation::relu:
      for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::tanh:
      for (auto& v : out.values()) v = std::tanh(v);
      break;
    case Activation::sigmoid:
      for (auto& v : out.values()) v = sigmoid(v);
      break;
    case Activation::identity:
      break;
  }
  Tape& t = *a.tape;
  // The output node is the next one recorded; its value drives the derivative.
  const auto out_id = static_cast<std::uint32_t>(t.size());
  return t.record(std::move(out), {a}, [a, act, out_id](Tape& tp, const Tensor& g) {
    const Tensor& y = tp.value(Var{&tp, out_id});
    auto& ga = tp.grad(a);
    switch (act) {
      case Activation::relu:
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] > 0.0 ? g[i] : 0.0;
        break;
      case Activation::tanh:
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      case Activation::sigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      case Activation::identity:
        break;
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) fail(ErrorCode::invalid_argument, "concat_cols: no inputs");
  const std::size_t m = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    if (p.value().rows() != m) shape_error("concat_cols", parts[0].shape(), p.shape());
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out({m, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t i = 0; i < m; ++i) {
      std::memcpy(out.data() + i * total + offset, v.data() + i * widths[k], widths[k] * sizeof(double));
    }
    offset += widths[k];
  }
  return parts[0].tape->record(std::move(out), parts, [parts, widths, m, total](Tape& tp, const Tensor& g) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (tp.requires_grad(parts[k])) {
        auto& gk = tp.grad(parts[k]);
        for (std::size_t i = 0; i < m; ++i) {
          const double* src = g.data() + i * total + off;
          double* dst = gk.data() + i * widths[k];
          for (std::size_t j = 0; j < widths[k]; ++j) dst[j] += src[j];
        }
      }
      off += widths[k];
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  const std::size_t m = av.rows(), n = av.cols();
  if (begin > end || end > n) fail(ErrorCode::invalid_argument, "slice_cols: bad range");
  const std::size_t w = end - begin;
  Tensor out({m, w});
  for (std::size_t i = 0; i < m; ++i) std::memcpy(out.data() + i * w, av.data() + i * n + begin, w * sizeof(double));
  return a.tape->record(std::move(out), {a}, [a, begin, m, n, w](Tape& tp, const Tensor& g) {
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) ga[i * n + begin + j] += g[i * w + j];
    }
  });
}

Var gather_rows(Var a, std::vector<std::int64_t> index) {
  const Tensor& av = a.value();
  const std::size_t n = av.cols();
  Tensor out({index.size(), n});
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto src = index[r];
    if (src < 0) continue;
    if (static_cast<std::size_t>(src) >= av.rows()) fail(ErrorCode::invalid_argument, "gather_rows: index out of range");
    std::memcpy(out.data() + r * n, av.data() + static_cast<std::size_t>(src) * n, n * sizeof(double));
  }
  return a.tape->record(std::move(out), {a}, [a, index = std::move(index), n](Tape& tp, const Tensor& g) {
    auto& ga = tp.grad(a);
    for (std::size_t r = 0; r < index.size(); ++r) {
      if (index[r] < 0) continue;
      double* dst = ga.data() + static_cast<std::size_t>(index[r]) * n;
      const double* src = g.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
    }
  });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.tape->record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) { add_into(tp.grad(a), g); });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape->record(Tensor({1}, {s}), {a}, [a](Tape& tp, const Tensor& g) {
    for (auto& v : tp.grad(a).values()) v += g[0];
  });
}

Var neighbor_mean(Var h, const LocalCsr& adj, const Var* weights) {
  const Tensor& hv = h.value();
  const std::size_t n = hv.rows(), d = hv.cols();
  if (adj.node_count() != n) {
    fail(ErrorCode::invalid_argument, "neighbor_mean: adjacency has " + std::to_string(adj.node_count()) +
                                          " nodes, features have " + std::to_string(n));
  }
  const Tensor* wv = nullptr;
  if (weights != nullptr) {
    wv = &weights->value();
    if (wv->size() != adj.slot_count()) {
      fail(ErrorCode::invalid_argument, "neighbor_mean: " + std::to_string(wv->size()) + " weights for " +
                                            std::to_string(adj.slot_count()) + " edge slots");
    }
  }
  const auto& k = kernels::active();
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.data() + i * d;
    const std::size_t deg = adj.degree(i);
    if (deg == 0) {
      std::memcpy(oi, hv.data() + i * d, d * sizeof(double));
      continue;
    }
    for (std::size_t s = adj.offsets[i]; s < adj.offsets[i + 1]; ++s) {
      k.axpy(d, wv ? (*wv)[s] : 1.0, hv.data() + adj.targets[s] * d, oi);
    }
    const double denom = static_cast<double>(deg);
    for (std::size_t j = 0; j < d; ++j) oi[j] /= denom;
  }
  std::vector<Var> inputs{h};
  const bool weighted = weights != nullptr;
  if (weighted) inputs.push_back(*weights);
  const Var w = weighted ? *weights : h;
  // The backward pass may run after the caller's adjacency is gone, so the
  // closure keeps its own copy.
  auto graph = std::make_shared<const LocalCsr>(adj);
  return h.tape->record(std::move(out), inputs, [h, w, weighted, graph, n, d](Tape& tp, const Tensor& g) {
    const auto& k = kernels::active();
    const Tensor& hv = tp.value(h);
    const Tensor* wv = weighted ? &tp.value(w) : nullptr;
    const bool need_h = tp.requires_grad(h);
    const bool need_w = weighted && tp.requires_grad(w);
    Tensor* gh = need_h ? &tp.grad(h) : nullptr;
    Tensor* gw = need_w ? &tp.grad(w) : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      const double* gi = g.data() + i * d;
      const std::size_t deg = graph->degree(i);
      if (deg == 0) {
        if (gh) k.axpy(d, 1.0, gi, gh->data() + i * d);
        continue;
      }
      const double inv = 1.0 / static_cast<double>(deg);
      for (std::size_t s = graph->offsets[i]; s < graph->offsets[i + 1]; ++s) {
        const std::size_t j = graph->targets[s];
        if (gh) k.axpy(d, (wv ? (*wv)[s] : 1.0) * inv, gi, gh->data() + j * d);
        if (gw) (*gw)[s] += inv * k.dot(d, gi, hv.data() + j * d);
      }
    }
  });
}

Var unfold_rows(Var a, std::size_t block, std::size_t span) {
  const Tensor& av = a.value();
  const std::size_t rows = av.rows(), d = av.cols();
  if (block == 0 || rows % block != 0 || span == 0 || span > block) {
    fail(ErrorCode::invalid_argument, "unfold_rows: span " + std::to_string(span) + " incompatible with block " +
                                          std::to_string(block) + " over " + std::to_string(rows) + " rows");
  }
  const std::size_t blocks = rows / block, positions = block - span + 1, width = span * d;
  Tensor out({blocks * positions, width});
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t p = 0; p < positions; ++p) {
      std::memcpy(out.data() + (b * positions + p) * width, av.data() + (b * block + p) * d, width * sizeof(double));
    }
  }
  return a.tape->record(std::move(out), {a}, [a, blocks, block, positions, width, d](Tape& tp, const Tensor& g) {
    auto& ga = tp.grad(a);
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t p = 0; p < positions; ++p) {
        kernels::active().axpy(width, 1.0, g.data() + (b * positions + p) * width, ga.data() + (b * block + p) * d);
      }
    }
  });
}

Var segment_max(Var a, std::size_t block) {
  const Tensor& av = a.value();
  const std::size_t rows = av.rows(), c = av.cols();
  if (block == 0 || rows % block != 0) fail(ErrorCode::invalid_argument, "segment_max: rows not divisible by block");
  const std::size_t blocks = rows / block;
  Tensor out({blocks, c});
  std::vector<std::size_t> argmax(blocks * c);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = b * block;
      for (std::size_t r = b * block + 1; r < (b + 1) * block; ++r) {
        if (av.at(r, j) > av.at(best, j)) best = r;
      }
      argmax[b * c + j] = best;
      out.at(b, j) = av.at(best, j);
    }
  }
  return a.tape->record(std::move(out), {a}, [a, argmax = std::move(argmax), c](Tape& tp, const Tensor& g) {
    auto& ga = tp.grad(a);
    for (std::size_t idx = 0; idx < argmax.size(); ++idx) ga[argmax[idx] * c + idx % c] += g[idx];
  });
}

Var bce_with_logits(Var logits, std::span<const double> labels) {
  const Tensor& z = logits.value();
  if (z.size() != labels.size()) {
    fail(ErrorCode::invalid_argument, "bce_with_logits: " + std::to_string(z.size()) + " logits for " +
                                          std::to_string(labels.size()) + " labels");
  }
  const std::size_t m = z.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double zi = z[i];
    loss += std::max(zi, 0.0) - zi * labels[i] + std::log1p(std::exp(-std::abs(zi)));
  }
  loss /= static_cast<double>(m);
  std::vector<double> y(labels.begin(), labels.end());
  return logits.tape->record(Tensor({1}, {loss}), {logits}, [logits, y = std::move(y)](Tape& tp, const Tensor& g) {
    const Tensor& z = tp.value(logits);
    auto& gz = tp.grad(logits);
    const double scale = g[0] / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) gz[i] += scale * (sigmoid(z[i]) - y[i]);
  });
}

Var step(Var a) {
  Tensor out = a.value();
  for (auto& v : out.values()) v = v > 0.0 ? 1.0 : 0.0;
  return a.tape->record(std::move(out), {a}, [](Tape&, const Tensor&) {}, /*differentiable=*/false);
}

}  // namespace templink::nn
