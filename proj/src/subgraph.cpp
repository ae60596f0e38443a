// SPDX-License-Identifier: Apache-2.0
#include "templink/subgraph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include "templink/error.hpp"
#include "templink/io.hpp"
#include "templink/rng.hpp"

namespace templink {

bool EnclosingSubgraph::has_edge(std::size_t i, std::size_t j) const {
  for (std::size_t s = adj.offsets[i]; s < adj.offsets[i + 1]; ++s) {
    if (adj.targets[s] == j) return true;
  }
  return false;
}

EnclosingSubgraph make_subgraph(std::vector<NodeId> nodes, std::span<const LocalEdge> edges, int hop) {
  const std::size_t n = nodes.size();
  // Slot lists per row, sorted by the neighbor's global id.
  std::vector<std::vector<std::pair<std::uint32_t, EdgeId>>> rows(n);
  for (const auto& e : edges) {
    if (e.a >= n || e.b >= n || e.a == e.b) fail(ErrorCode::invalid_argument, "make_subgraph: bad local edge");
    rows[e.a].emplace_back(e.b, e.edge);
    rows[e.b].emplace_back(e.a, e.edge);
  }
  EnclosingSubgraph sub;
  sub.hop = hop;
  sub.adj.offsets.assign(1, 0);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [&](const auto& p, const auto& q) { return nodes[p.first] < nodes[q.first]; });
    for (const auto& [t, e] : row) {
      sub.adj.targets.push_back(t);
      sub.slot_edges.push_back(e);
    }
    sub.adj.offsets.push_back(static_cast<std::uint32_t>(sub.adj.targets.size()));
  }
  sub.nodes = std::move(nodes);
  return sub;
}

namespace {

/// Induced subgraph of `view` over `nodes` (any order; targets first). Row
/// slots come out in ascending global id because base adjacency is sorted.
EnclosingSubgraph induce_from_view(const GraphView& view, std::vector<NodeId> nodes, int hop,
                                   std::int64_t hidden_edge) {
  std::vector<std::pair<NodeId, std::uint32_t>> index(nodes.size());
  for (std::uint32_t i = 0; i < nodes.size(); ++i) index[i] = {nodes[i], i};
  std::sort(index.begin(), index.end());
  auto local_of = [&](NodeId g) -> std::int64_t {
    auto it = std::lower_bound(index.begin(), index.end(), std::pair<NodeId, std::uint32_t>{g, 0});
    return (it != index.end() && it->first == g) ? static_cast<std::int64_t>(it->second) : std::int64_t{-1};
  };
  EnclosingSubgraph sub;
  sub.hop = hop;
  sub.adj.offsets.assign(1, 0);
  for (NodeId g : nodes) {
    view.for_each_neighbor(g, [&](NodeId w, EdgeId e) {
      if (static_cast<std::int64_t>(e) == hidden_edge) return;
      const auto l = local_of(w);
      if (l < 0) return;
      sub.adj.targets.push_back(static_cast<std::uint32_t>(l));
      sub.slot_edges.push_back(e);
    });
    sub.adj.offsets.push_back(static_cast<std::uint32_t>(sub.adj.targets.size()));
  }
  sub.nodes = std::move(nodes);
  return sub;
}

/// Ascending global ids within `hop` of any root, roots excluded.
std::vector<NodeId> neighborhood(const GraphView& view, std::span<const NodeId> roots, int hop) {
  std::vector<NodeId> frontier(roots.begin(), roots.end());
  std::vector<NodeId> seen(roots.begin(), roots.end());
  std::sort(seen.begin(), seen.end());
  for (int h = 0; h < hop; ++h) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) view.for_each_neighbor(u, [&](NodeId w, EdgeId) { next.push_back(w); });
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    std::vector<NodeId> fresh;
    std::set_difference(next.begin(), next.end(), seen.begin(), seen.end(), std::back_inserter(fresh));
    std::vector<NodeId> merged;
    std::merge(seen.begin(), seen.end(), fresh.begin(), fresh.end(), std::back_inserter(merged));
    seen = std::move(merged);
    frontier = std::move(fresh);
  }
  std::vector<NodeId> out;
  for (NodeId u : seen) {
    if (std::find(roots.begin(), roots.end(), u) == roots.end()) out.push_back(u);
  }
  return out;
}

std::vector<NodeId> capped(std::vector<NodeId> rest, std::size_t room, Rng rng) {
  if (rest.size() <= room) return rest;
  auto kept = sample_without_replacement(std::move(rest), room, rng);
  std::sort(kept.begin(), kept.end());
  return kept;
}

void check_hop(int hop) {
  if (hop != 1 && hop != 2) fail(ErrorCode::invalid_argument, "hop must be 1 or 2, got " + std::to_string(hop));
}

}  // namespace

EnclosingSubgraph extract_enclosing(const GraphView& view, NodeId x, NodeId y, int hop, std::size_t cap,
                                    bool hide_xy, std::uint64_t seed) {
  if (x == y) fail(ErrorCode::invalid_argument, "extract_enclosing: x == y");
  if (cap < 2) fail(ErrorCode::invalid_argument, "extract_enclosing: cap must be at least 2");
  if (x >= view.node_count() || y >= view.node_count()) {
    fail(ErrorCode::invalid_argument, "extract_enclosing: node id out of range");
  }
  check_hop(hop);
  const NodeId roots[2] = {x, y};
  auto rest = capped(neighborhood(view, roots, hop), cap - 2, Rng(seed, {0x5b6ULL, x, y}));
  std::vector<NodeId> nodes{x, y};
  nodes.insert(nodes.end(), rest.begin(), rest.end());
  std::int64_t hidden = -1;
  if (hide_xy) {
    if (auto e = view.base().find_edge(x, y)) hidden = *e;
  }
  auto sub = induce_from_view(view, std::move(nodes), hop, hidden);
  sub.xy_hidden = hide_xy;
  return sub;
}

EnclosingSubgraph extract_ego(const GraphView& view, NodeId x, int hop, std::size_t cap, std::uint64_t seed) {
  if (cap < 1) fail(ErrorCode::invalid_argument, "extract_ego: cap must be positive");
  if (x >= view.node_count()) fail(ErrorCode::invalid_argument, "extract_ego: node id out of range");
  check_hop(hop);
  const NodeId roots[1] = {x};
  auto rest = capped(neighborhood(view, roots, hop), cap - 1, Rng(seed, {0xe90ULL, x}));
  std::vector<NodeId> nodes{x};
  nodes.insert(nodes.end(), rest.begin(), rest.end());
  return induce_from_view(view, std::move(nodes), hop, -1);
}

EnclosingSubgraph induced(const EnclosingSubgraph& sub, std::span<const std::uint32_t> keep) {
  std::vector<std::int64_t> new_index(sub.node_count(), -1);
  for (std::uint32_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= sub.node_count() || new_index[keep[i]] >= 0) {
      fail(ErrorCode::invalid_argument, "induced: bad or repeated local id");
    }
    new_index[keep[i]] = i;
  }
  EnclosingSubgraph out;
  out.hop = sub.hop;
  out.xy_hidden = sub.xy_hidden;
  out.adj.offsets.assign(1, 0);
  for (std::uint32_t old : keep) {
    out.nodes.push_back(sub.nodes[old]);
    // Source rows are already in ascending global id; filtering keeps that.
    for (std::size_t s = sub.adj.offsets[old]; s < sub.adj.offsets[old + 1]; ++s) {
      const auto t = new_index[sub.adj.targets[s]];
      if (t < 0) continue;
      out.adj.targets.push_back(static_cast<std::uint32_t>(t));
      out.slot_edges.push_back(sub.slot_edges[s]);
      if (sub.weighted()) out.edge_weights.push_back(sub.edge_weights[s]);
    }
    out.adj.offsets.push_back(static_cast<std::uint32_t>(out.adj.targets.size()));
  }
  return out;
}

EnclosingSubgraph permuted(const EnclosingSubgraph& sub, std::span<const std::uint32_t> perm) {
  if (perm.size() != sub.node_count()) fail(ErrorCode::invalid_argument, "permuted: permutation size mismatch");
  return induced(sub, perm);
}

std::vector<std::int32_t> bfs_distances(const LocalCsr& adj, std::uint32_t source, std::int64_t removed) {
  std::vector<std::int32_t> dist(adj.node_count(), -1);
  if (static_cast<std::int64_t>(source) == removed) return dist;
  std::vector<std::uint32_t> queue{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    for (std::size_t s = adj.offsets[u]; s < adj.offsets[u + 1]; ++s) {
      const auto w = adj.targets[s];
      if (dist[w] >= 0 || static_cast<std::int64_t>(w) == removed) continue;
      dist[w] = dist[u] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

std::vector<std::int32_t> drnl_labels(const EnclosingSubgraph& sub, bool hide_targets) {
  const std::size_t n = sub.node_count();
  std::vector<std::int32_t> labels(n, 0);
  if (n < 2) return labels;
  const auto dx = bfs_distances(sub.adj, 0, hide_targets ? 1 : -1);
  const auto dy = bfs_distances(sub.adj, 1, hide_targets ? 0 : -1);
  labels[0] = labels[1] = 1;
  for (std::size_t i = 2; i < n; ++i) {
    if (dx[i] < 0 || dy[i] < 0) continue;
    const std::int32_t d = dx[i] + dy[i];
    const std::int32_t half = d / 2;
    labels[i] = 1 + std::min(dx[i], dy[i]) + half * (half + d % 2 - 1);
  }
  return labels;
}

std::vector<std::uint32_t> wl_colors(const EnclosingSubgraph& sub, std::span<const std::int32_t> initial) {
  const std::size_t n = sub.node_count();
  // Sentinel 0 (unreachable) ranks after every finite label.
  std::vector<std::uint32_t> color(n);
  {
    std::vector<std::int64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = initial[i] == 0 ? INT64_MAX : initial[i];
    auto sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      color[i] = static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
    }
  }
  std::size_t classes = std::set<std::uint32_t>(color.begin(), color.end()).size();
  for (std::size_t iter = 0; iter < n; ++iter) {
    // Signature = own color followed by the sorted multiset of neighbor
    // colors; lexicographic rank of the signature is the next color, which
    // keeps the refinement order-consistent with the previous coloring.
    std::vector<std::vector<std::uint32_t>> sig(n);
    for (std::size_t i = 0; i < n; ++i) {
      sig[i].push_back(color[i]);
      std::vector<std::uint32_t> nb;
      for (std::size_t s = sub.adj.offsets[i]; s < sub.adj.offsets[i + 1]; ++s) nb.push_back(color[sub.adj.targets[s]]);
      std::sort(nb.begin(), nb.end());
      sig[i].insert(sig[i].end(), nb.begin(), nb.end());
    }
    auto sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      color[i] = static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), sig[i]) - sorted.begin());
    }
    if (sorted.size() == classes) break;
    classes = sorted.size();
  }
  return color;
}

std::vector<std::uint32_t> palette_wl_order(const EnclosingSubgraph& sub, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::invalid_argument, "palette_wl_order: K must be at least 2");
  const std::size_t n = sub.node_count();
  const auto labels = drnl_labels(sub, false);
  const auto colors = wl_colors(sub, labels);
  const std::uint64_t key = n >= 2 ? stream_key(seed, {0x3a1ULL, sub.nodes[0], sub.nodes[1]}) : seed;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto rank = [&](std::uint32_t i) {
    const std::int64_t label = labels[i] == 0 ? INT64_MAX : labels[i];
    return std::make_tuple(i < 2 ? 0 : 1, i < 2 ? i : 0u, colors[i], label, mix64(key ^ sub.nodes[i]));
  };
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return rank(a) < rank(b); });
  order.resize(std::min(k, n));
  return order;
}

nn::Tensor encode_labels(std::span<const std::int32_t> labels, std::size_t l_max) {
  nn::Tensor out({labels.size(), l_max + 1});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) fail(ErrorCode::invalid_argument, "encode_labels: negative label");
    out.at(i, std::min<std::size_t>(static_cast<std::size_t>(labels[i]), l_max)) = 1.0;
  }
  return out;
}

void write_edge_list(std::ostream& out, const EnclosingSubgraph& sub) {
  out << "# nodes";
  for (NodeId g : sub.nodes) out << ' ' << g;
  out << "\n# hop " << sub.hop << (sub.xy_hidden ? " xy_hidden" : "") << '\n';
  for (std::size_t i = 0; i < sub.node_count(); ++i) {
    for (std::size_t s = sub.adj.offsets[i]; s < sub.adj.offsets[i + 1]; ++s) {
      const auto j = sub.adj.targets[s];
      if (sub.nodes[i] > sub.nodes[j]) continue;
      out << sub.nodes[i] << ' ' << sub.nodes[j];
      if (sub.weighted()) out << ' ' << format_double(sub.edge_weights[s]);
      out << '\n';
    }
  }
}

}  // namespace templink
