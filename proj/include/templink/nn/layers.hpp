// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "templink/local_graph.hpp"
#include "templink/nn/ops.hpp"
#include "templink/nn/tensor.hpp"

namespace templink::nn {

enum class Init { uniform_fan_in, zero };

/// Adds a parameter drawn U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from a stream
/// keyed by (seed, name), so values do not depend on creation order.
Parameter& add_parameter(ParameterStore& store, const std::string& name, Shape shape, std::size_t fan_in,
                         std::uint64_t seed, Init init = Init::uniform_fan_in);

/// Fully connected layer: act(x W + b).
struct Dense {
  Parameter* weight = nullptr;  // [in, out]
  Parameter* bias = nullptr;    // [out]
  Activation act = Activation::identity;

  static Dense create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                      Activation act, std::uint64_t seed, Init init = Init::uniform_fan_in);
  std::size_t in_dim() const { return weight->value.rows(); }
  std::size_t out_dim() const { return weight->value.cols(); }
  Var forward(Tape& tape, Var x) const;
};

/// GRU cell. The input projections of the three gates share one matrix
/// wx = [Wz_x | Wr_x | Wh_x] and one bias; the recurrent side is split into
/// wh_zr = [Wz_h | Wr_h] and wh_h because the candidate reads r * h.
struct GruCell {
  Parameter* wx = nullptr;     // [in, 3H]
  Parameter* wh_zr = nullptr;  // [H, 2H]
  Parameter* wh_h = nullptr;   // [H, H]
  Parameter* bias = nullptr;   // [3H]

  static GruCell create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t hidden,
                        std::uint64_t seed);
  std::size_t in_dim() const { return wx->value.rows(); }
  std::size_t hidden_dim() const { return wh_h->value.rows(); }

  /// h' = (1 - z) * h + z * tanh(x Wh_x + (r * h) Wh_h + b_h).
  Var step(Tape& tape, Var x, Var h) const;
  /// Runs over `data` of shape [batch, steps, in] from a zero state and
  /// returns the final hidden state; items stop updating after their length.
  Var run(Tape& tape, const Tensor& data, std::span<const std::uint32_t> lengths) const;
};

/// Block-diagonal batch of local graphs: graph g owns rows
/// [offsets[g], offsets[g+1]) of every node matrix and of `adj`.
struct GraphBatch {
  LocalCsr adj;
  std::vector<std::uint32_t> offsets{0};
  std::vector<double> weights;  // one per adjacency slot when weighted
  bool weighted = false;

  std::size_t graph_count() const { return offsets.size() - 1; }
  std::size_t node_count() const { return adj.node_count(); }
};

/// h'_i = act((1 / max(1, |N_i|)) sum_j a_ij (h_j W)); isolated nodes use h_i W.
struct GraphConv {
  Parameter* weight = nullptr;  // [in, out]
  Activation act = Activation::relu;

  static GraphConv create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                          Activation act, std::uint64_t seed);
  Var forward(Tape& tape, Var h, const LocalCsr& adj, const Var* weights) const;
};

/// Sorts each graph's rows descending by the last channel (ties: the next
/// channel to the left, then original row order), keeps K rows and pads with
/// zero rows: [N, d] -> [B*K, d].
Var sort_pool(Var h, std::span<const std::uint32_t> offsets, std::size_t k);

/// 1-D convolution over the row-flattened [B*K, d] input with stride d and a
/// window of `span` node slots, followed by a global max over positions.
struct Conv1dReadout {
  Parameter* kernel = nullptr;  // [span*d, channels]
  Parameter* bias = nullptr;    // [channels]
  std::size_t span = 1;
  Activation act = Activation::relu;

  static Conv1dReadout create(ParameterStore& store, const std::string& name, std::size_t d, std::size_t span,
                              std::size_t channels, Activation act, std::uint64_t seed);
  /// [B*K, d] -> [B, channels].
  Var forward(Tape& tape, Var x, std::size_t k) const;
};

/// Concatenates the rows of the two target nodes (local 0 and 1) of every
/// graph: [N, d] -> [B, 2d].
Var two_node_pool(Var h, std::span<const std::uint32_t> offsets);

}  // namespace templink::nn
