// SPDX-License-Identifier: Apache-2.0
#include "templink/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "templink/error.hpp"
#include "templink/rng.hpp"

namespace templink::nn {

namespace {

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Parameter& add_parameter(ParameterStore& store, const std::string& name, Shape shape, std::size_t fan_in,
                         std::uint64_t seed, Init init) {
  Tensor value(std::move(shape));
  if (init == Init::uniform_fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    Rng rng(seed, {0x1a7e5ULL, name_hash(name)});
    for (auto& v : value.values()) v = rng.uniform(-bound, bound);
  }
  return store.add(name, std::move(value));
}

Dense Dense::create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                    Activation act, std::uint64_t seed, Init init) {
  Dense d;
  d.weight = &add_parameter(store, name + ".w", {in, out}, in, seed, init);
  d.bias = &add_parameter(store, name + ".b", {out}, in, seed, Init::zero);
  d.act = act;
  return d;
}

Var Dense::forward(Tape& tape, Var x) const {
  if (x.value().cols() != in_dim()) {
    fail(ErrorCode::invalid_argument, "dense: input width " + std::to_string(x.value().cols()) + ", expected " +
                                          std::to_string(in_dim()));
  }
  Var y = add_bias(matmul(x, tape.parameter(*weight)), tape.parameter(*bias));
  return activate(y, act);
}

GruCell GruCell::create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t hidden,
                        std::uint64_t seed) {
  GruCell g;
  const std::size_t fan_in = in + hidden;
  g.wx = &add_parameter(store, name + ".wx", {in, 3 * hidden}, fan_in, seed);
  g.wh_zr = &add_parameter(store, name + ".wh_zr", {hidden, 2 * hidden}, fan_in, seed);
  g.wh_h = &add_parameter(store, name + ".wh_h", {hidden, hidden}, fan_in, seed);
  g.bias = &add_parameter(store, name + ".b", {3 * hidden}, fan_in, seed, Init::zero);
  return g;
}

Var GruCell::step(Tape& tape, Var x, Var h) const {
  const std::size_t hd = hidden_dim();
  if (x.value().cols() != in_dim() || h.value().cols() != hd || x.value().rows() != h.value().rows()) {
    fail(ErrorCode::invalid_argument, "gru_step: input " + shape_string(x.shape()) + " / state " +
                                          shape_string(h.shape()) + " do not fit the cell");
  }
  Var xw = add_bias(matmul(x, tape.parameter(*wx)), tape.parameter(*bias));
  Var hzr = matmul(h, tape.parameter(*wh_zr));
  Var z = activate(add(slice_cols(xw, 0, hd), slice_cols(hzr, 0, hd)), Activation::sigmoid);
  Var r = activate(add(slice_cols(xw, hd, 2 * hd), slice_cols(hzr, hd, 2 * hd)), Activation::sigmoid);
  Var cand = activate(add(slice_cols(xw, 2 * hd, 3 * hd), matmul(mul(r, h), tape.parameter(*wh_h))),
                      Activation::tanh);
  // (1 - z) h + z cand  ==  h + z (cand - h)
  return add(h, mul(z, sub(cand, h)));
}

Var GruCell::run(Tape& tape, const Tensor& data, std::span<const std::uint32_t> lengths) const {
  if (data.rank() != 3 || data.shape()[2] != in_dim()) {
    fail(ErrorCode::invalid_argument, "gru: expected [batch, steps, " + std::to_string(in_dim()) + "], got " +
                                          shape_string(data.shape()));
  }
  const std::size_t batch = data.shape()[0], steps = data.shape()[1], f = data.shape()[2];
  if (lengths.size() != batch) fail(ErrorCode::invalid_argument, "gru: lengths do not match batch");
  const bool ragged = std::any_of(lengths.begin(), lengths.end(), [&](auto l) { return l != steps; });
  Var h = tape.constant(Tensor({batch, hidden_dim()}));
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor xt({batch, f});
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(data.data() + (b * steps + t) * f, f, xt.data() + b * f);
    }
    Var next = step(tape, tape.constant(std::move(xt)), h);
    if (ragged) {
      Tensor keep({batch, hidden_dim()});
      for (std::size_t b = 0; b < batch; ++b) {
        if (t < lengths[b]) std::fill_n(keep.data() + b * hidden_dim(), hidden_dim(), 1.0);
      }
      Var m = tape.constant(std::move(keep));
      next = add(h, mul(m, sub(next, h)));
    }
    h = next;
  }
  return h;
}

GraphConv GraphConv::create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                            Activation act, std::uint64_t seed) {
  GraphConv g;
  g.weight = &add_parameter(store, name + ".w", {in, out}, in, seed);
  g.act = act;
  return g;
}

Var GraphConv::forward(Tape& tape, Var h, const LocalCsr& adj, const Var* weights) const {
  // Aggregating after the projection is the same sum and costs less when the
  // layer narrows.
  return activate(neighbor_mean(matmul(h, tape.parameter(*weight)), adj, weights), act);
}

Var sort_pool(Var h, std::span<const std::uint32_t> offsets, std::size_t k) {
  if (k == 0) fail(ErrorCode::invalid_argument, "sort_pool: K must be positive");
  const Tensor& hv = h.value();
  const std::size_t d = hv.cols();
  const std::size_t graphs = offsets.size() - 1;
  std::vector<std::int64_t> index(graphs * k, -1);
  std::vector<std::uint32_t> order;
  for (std::size_t g = 0; g < graphs; ++g) {
    order.resize(offsets[g + 1] - offsets[g]);
    std::iota(order.begin(), order.end(), offsets[g]);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      for (std::size_t c = d; c-- > 0;) {
        const double va = hv.at(a, c), vb = hv.at(b, c);
        if (va != vb) return va > vb;
      }
      return false;
    });
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i) index[g * k + i] = order[i];
  }
  return gather_rows(h, std::move(index));
}

Conv1dReadout Conv1dReadout::create(ParameterStore& store, const std::string& name, std::size_t d,
                                    std::size_t span, std::size_t channels, Activation act, std::uint64_t seed) {
  Conv1dReadout c;
  c.kernel = &add_parameter(store, name + ".kernel", {span * d, channels}, span * d, seed);
  c.bias = &add_parameter(store, name + ".b", {channels}, span * d, seed, Init::zero);
  c.span = span;
  c.act = act;
  return c;
}

Var Conv1dReadout::forward(Tape& tape, Var x, std::size_t k) const {
  const std::size_t d = x.value().cols();
  if (span * d != kernel->value.rows()) {
    fail(ErrorCode::invalid_argument, "conv1d_readout: row width " + std::to_string(d) + " does not fit kernel " +
                                          shape_string(kernel->value.shape()));
  }
  Var windows = unfold_rows(x, k, span);
  Var y = activate(add_bias(matmul(windows, tape.parameter(*kernel)), tape.parameter(*bias)), act);
  return segment_max(y, k - span + 1);
}

Var two_node_pool(Var h, std::span<const std::uint32_t> offsets) {
  const std::size_t graphs = offsets.size() - 1;
  std::vector<std::int64_t> index;
  index.reserve(2 * graphs);
  for (std::size_t g = 0; g < graphs; ++g) {
    if (offsets[g + 1] - offsets[g] < 2) fail(ErrorCode::invalid_argument, "two_node_pool: graph has < 2 nodes");
    index.push_back(offsets[g]);
    index.push_back(offsets[g] + 1);
  }
  const std::size_t d = h.value().cols();
  return reshape(gather_rows(h, std::move(index)), {graphs, 2 * d});
}

}  // namespace templink::nn
