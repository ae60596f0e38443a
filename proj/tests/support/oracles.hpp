// SPDX-License-Identifier: Apache-2.0
// Independent brute-force references used by unit and acceptance tests.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "templink/graph_store.hpp"
#include "templink/heuristics.hpp"
#include "templink/nn/tensor.hpp"
#include "templink/subgraph.hpp"

namespace templink::check {

/// Erdos-Renyi graph with one transfer per edge at t = 100 (so the full
/// window activates every edge), plus its adjacency matrix.
struct RandomGraph {
  TemporalGraph graph;
  std::vector<std::vector<bool>> adj;
};
RandomGraph random_graph(std::size_t n, double p, std::uint64_t seed);

/// Subgraph over all nodes of `adj` with local 0 = x and 1 = y, the rest in
/// ascending id; edge ids are arbitrary.
EnclosingSubgraph whole_graph_subgraph(const std::vector<std::vector<bool>>& adj, std::uint32_t x, std::uint32_t y);

/// DRNL from Floyd-Warshall distances on a dense matrix and the closed-form
/// label, written independently of the library.
std::vector<std::int32_t> brute_drnl(const EnclosingSubgraph& sub, bool hide_targets);

/// Heuristic from explicit neighbor sets of the adjacency matrix.
double brute_heuristic(HeuristicKind kind, const std::vector<std::vector<bool>>& adj, std::uint32_t u, std::uint32_t v,
                       bool hide_uv);

/// Pair-counting AUC: O(P * N), ties count one half.
double brute_auc(std::span<const double> scores, std::span<const int> labels);

/// Largest |analytic - numeric| / max(|analytic| + |numeric|, floor) over
/// every scalar of every parameter in `store`, with central differences of
/// step `eps`. `loss` builds a scalar on a fresh tape from the store.
struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;  // parameter[index] with the largest error
  std::size_t checked = 0;
};
GradCheck check_gradients(nn::ParameterStore& store, const std::function<nn::Var(nn::Tape&)>& loss,
                          double eps = 1e-5, double floor = 1e-6);

/// Tensor with entries U(lo, hi) from a seeded stream.
nn::Tensor random_tensor(nn::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

/// Weighted sum of all entries with fixed pseudo-random coefficients, a
/// scalar loss whose gradient reaches every output element.
nn::Var probe_loss(nn::Var out, std::uint64_t seed);

}  // namespace templink::check
