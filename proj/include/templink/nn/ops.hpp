// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "templink/local_graph.hpp"
#include "templink/nn/tensor.hpp"

// Differentiable primitives. Matrices are rank-2 (rows x cols); inputs with
// higher rank are read through the same rows/cols view.

namespace templink::nn {

enum class Activation { identity, relu, tanh, sigmoid };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation act);

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var one_minus(Var a);
Var scale(Var a, double factor);
/// Adds a bias of cols() entries to every row.
Var add_bias(Var a, Var bias);
Var activate(Var a, Activation act);

Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
/// Row gather; index -1 yields a zero row.
Var gather_rows(Var a, std::vector<std::int64_t> index);
Var reshape(Var a, Shape shape);

Var sum(Var a);

/// out_i = (1 / |N_i|) * sum_{slot s of row i} w_s * h[target_s]; a node with
/// an empty row passes its own h_i through. `weights` (one per slot) may be
/// null, meaning w = 1. The adjacency is copied, so it need not outlive the tape.
Var neighbor_mean(Var h, const LocalCsr& adj, const Var* weights);

/// For consecutive blocks of `block` rows, emits every window of `span` rows
/// flattened into one row: [B*block, d] -> [B*(block-span+1), span*d].
Var unfold_rows(Var a, std::size_t block, std::size_t span);
/// Column-wise max over consecutive blocks of rows: [B*block, c] -> [B, c].
Var segment_max(Var a, std::size_t block);

/// Mean binary cross-entropy of sigmoid(logits) against 0/1 labels.
Var bce_with_logits(Var logits, std::span<const double> labels);

/// Heaviside step (x > 0). Integer-valued, so backward through it fails.
Var step(Var a);

double sigmoid(double x);

}  // namespace templink::nn
