// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "templink/graph_store.hpp"
#include "templink/local_graph.hpp"
#include "templink/nn/tensor.hpp"

namespace templink {

/// Induced subgraph around a target pair. Local nodes 0 and 1 are the targets
/// x and y; the rest follow in ascending global id unless a caller reorders
/// them. Each adjacency row lists neighbors in ascending *global* id, so any
/// sum over a row visits the same values in the same order no matter how the
/// local indices are permuted.
struct EnclosingSubgraph {
  std::vector<NodeId> nodes;
  LocalCsr adj;
  std::vector<EdgeId> slot_edges;    // base-graph edge per adjacency slot
  std::vector<double> edge_weights;  // per slot; empty when unweighted
  int hop = 1;
  bool xy_hidden = false;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return adj.slot_count() / 2; }
  bool weighted() const { return !edge_weights.empty(); }
  bool has_edge(std::size_t i, std::size_t j) const;
};

struct LocalEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  EdgeId edge = 0;
};

/// Builds a subgraph from explicit local edges (undirected, no duplicates, no
/// self-loops). Rows are ordered by the global ids in `nodes`.
EnclosingSubgraph make_subgraph(std::vector<NodeId> nodes, std::span<const LocalEdge> edges, int hop = 1);

/// {x, y} plus the hop-neighborhoods of both in `view`. When more than `cap`
/// nodes qualify, the targets are kept together with a uniform subsample of
/// the rest drawn from a stream keyed by (seed, x, y). `hide_xy` removes only
/// the x-y edge.
EnclosingSubgraph extract_enclosing(const GraphView& view, NodeId x, NodeId y, int hop, std::size_t cap,
                                    bool hide_xy, std::uint64_t seed);

/// Single-root variant: node 0 is `x`, followed by its hop-neighborhood.
EnclosingSubgraph extract_ego(const GraphView& view, NodeId x, int hop, std::size_t cap, std::uint64_t seed);

/// Subgraph induced by `keep` (local ids, in output order).
EnclosingSubgraph induced(const EnclosingSubgraph& sub, std::span<const std::uint32_t> keep);

/// Same subgraph with local indices relabelled: new local i is old perm[i].
EnclosingSubgraph permuted(const EnclosingSubgraph& sub, std::span<const std::uint32_t> perm);

/// Double-radius node labels. Targets get 1; other nodes
/// 1 + min(dx, dy) + (d/2) * ((d/2) + (d%2) - 1) with d = dx + dy; any node
/// with an infinite distance gets the sentinel 0. With `hide_targets`, dx is
/// measured with y removed and dy with x removed.
std::vector<std::int32_t> drnl_labels(const EnclosingSubgraph& sub, bool hide_targets);

/// Hop distances from `source` (-1 when unreachable), optionally skipping one
/// node entirely.
std::vector<std::int32_t> bfs_distances(const LocalCsr& adj, std::uint32_t source, std::int64_t removed = -1);

/// Weisfeiler-Lehman ordering seeded with intact-subgraph DRNL labels:
/// targets first, then by stable refined color, initial label (sentinel
/// last) and a seeded per-node tiebreak. Returns min(K, n) local ids.
std::vector<std::uint32_t> palette_wl_order(const EnclosingSubgraph& sub, std::size_t k, std::uint64_t seed);

/// Refined colors after WL iteration reaches a stable partition.
std::vector<std::uint32_t> wl_colors(const EnclosingSubgraph& sub, std::span<const std::int32_t> initial);

/// One-hot label matrix [n, l_max + 1]; label l goes to column min(l, l_max),
/// the sentinel 0 to column 0.
nn::Tensor encode_labels(std::span<const std::int32_t> labels, std::size_t l_max);

/// Human-readable edge list (`# nodes ...` header, then `a b [weight]` lines
/// with global ids).
void write_edge_list(std::ostream& out, const EnclosingSubgraph& sub);

}  // namespace templink
