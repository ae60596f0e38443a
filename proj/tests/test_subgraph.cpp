// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "support/oracles.hpp"
#include "templink/error.hpp"
#include "templink/rng.hpp"
#include "templink/subgraph.hpp"

using namespace templink;
using templink::check::brute_drnl;
using templink::check::random_graph;
using templink::check::whole_graph_subgraph;

namespace {

// Nodes within `hop` of x or y by brute-force BFS over the adjacency matrix.
std::set<NodeId> brute_neighborhood(const std::vector<std::vector<bool>>& adj, NodeId x, NodeId y, int hop) {
  std::set<NodeId> out{x, y};
  std::vector<NodeId> frontier{x, y};
  for (int h = 0; h < hop; ++h) {
    std::vector<NodeId> next;
    for (auto u : frontier) {
      for (NodeId w = 0; w < adj.size(); ++w) {
        if (adj[u][w] && out.insert(w).second) next.push_back(w);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

TEST(Drnl, HandWorkedPathLabels) {
  // x(0) - a(2) - y(1), b(3) hangs off a, c(4) isolated.
  std::vector<std::vector<bool>> adj(5, std::vector<bool>(5, false));
  auto link = [&](int a, int b) { adj[a][b] = adj[b][a] = true; };
  link(0, 2);
  link(2, 1);
  link(2, 3);
  const auto sub = whole_graph_subgraph(adj, 0, 1);
  const auto labels = drnl_labels(sub, true);
  // locals: 0=x, 1=y, 2=a (1,1), 3=b (2,2), 4=c unreachable
  EXPECT_EQ(labels, (std::vector<std::int32_t>{1, 1, 2, 5, 0}));
}

TEST(Drnl, HidingTargetsChangesDistancesThroughTheOtherTarget) {
  // x - y - z: with y removed z is unreachable from x, so z gets the sentinel.
  std::vector<std::vector<bool>> adj(3, std::vector<bool>(3, false));
  adj[0][1] = adj[1][0] = adj[1][2] = adj[2][1] = true;
  const auto sub = whole_graph_subgraph(adj, 0, 1);
  EXPECT_EQ(drnl_labels(sub, true)[2], 0);
  // Without hiding: dx = 2, dy = 1, d = 3 -> 1 + 1 + 1 * (1 + 1 - 1) = 3.
  EXPECT_EQ(drnl_labels(sub, false)[2], 3);
}

TEST(Drnl, MatchesBruteForceOnRandomGraphs) {
  Rng pick(99, {});
  for (std::uint64_t g = 0; g < 60; ++g) {
    const std::size_t n = 5 + pick.below(36);
    const auto rg = random_graph(n, 0.15, g);
    const auto x = static_cast<NodeId>(pick.below(n));
    auto y = static_cast<NodeId>(pick.below(n - 1));
    if (y >= x) ++y;
    const auto sub = whole_graph_subgraph(rg.adj, x, y);
    for (bool hide : {false, true}) {
      ASSERT_EQ(drnl_labels(sub, hide), brute_drnl(sub, hide)) << "graph " << g << " hide " << hide;
    }
  }
}

TEST(Extraction, HopNeighborhoodMatchesBruteForce) {
  Rng pick(5, {});
  for (std::uint64_t g = 0; g < 40; ++g) {
    const std::size_t n = 10 + pick.below(30);
    const auto rg = random_graph(n, 0.1, 100 + g);
    const auto view = restrict(rg.graph, rg.graph.full_window());
    const auto x = static_cast<NodeId>(pick.below(n));
    auto y = static_cast<NodeId>(pick.below(n - 1));
    if (y >= x) ++y;
    for (int hop : {1, 2}) {
      const auto sub = extract_enclosing(view, x, y, hop, 1000, true, 1);
      EXPECT_EQ(sub.nodes[0], x);
      EXPECT_EQ(sub.nodes[1], y);
      EXPECT_EQ(std::set<NodeId>(sub.nodes.begin(), sub.nodes.end()), brute_neighborhood(rg.adj, x, y, hop));
      EXPECT_FALSE(sub.has_edge(0, 1));
      for (std::size_t i = 0; i < sub.node_count(); ++i) {
        for (std::size_t j = 0; j < sub.node_count(); ++j) {
          if (i == j || (i < 2 && j < 2)) continue;
          EXPECT_EQ(sub.has_edge(i, j), static_cast<bool>(rg.adj[sub.nodes[i]][sub.nodes[j]]));
        }
      }
      ASSERT_EQ(drnl_labels(sub, true), brute_drnl(sub, true));
    }
  }
}

TEST(Extraction, CapKeepsTargetsAndIsSeeded) {
  const auto rg = random_graph(60, 0.3, 4);
  const auto view = restrict(rg.graph, rg.graph.full_window());
  const auto a = extract_enclosing(view, 3, 7, 2, 10, false, 11);
  const auto b = extract_enclosing(view, 3, 7, 2, 10, false, 11);
  EXPECT_EQ(a.node_count(), 10u);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.nodes[0], 3u);
  EXPECT_EQ(a.nodes[1], 7u);
  EXPECT_THROW(extract_enclosing(view, 3, 3, 1, 10, false, 1), Error);
  EXPECT_THROW(extract_enclosing(view, 3, 4, 1, 1, false, 1), Error);
}

TEST(Subgraph, PermutedAndInducedPreserveStructure) {
  const auto rg = random_graph(20, 0.25, 8);
  const auto sub = whole_graph_subgraph(rg.adj, 2, 9);
  std::vector<std::uint32_t> perm(sub.node_count());
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(1, {});
  std::vector<std::uint32_t> rest(perm.begin() + 2, perm.end());
  shuffle(rest, rng);
  std::copy(rest.begin(), rest.end(), perm.begin() + 2);
  const auto p = permuted(sub, perm);
  for (std::size_t i = 0; i < p.node_count(); ++i) {
    EXPECT_EQ(p.nodes[i], sub.nodes[perm[i]]);
    for (std::size_t j = 0; j < p.node_count(); ++j) EXPECT_EQ(p.has_edge(i, j), sub.has_edge(perm[i], perm[j]));
  }
  const auto base = drnl_labels(sub, true);
  const auto moved = drnl_labels(p, true);
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(moved[i], base[perm[i]]);

  const std::vector<std::uint32_t> keep{0, 1, 5, 6};
  const auto ind = induced(sub, keep);
  ASSERT_EQ(ind.node_count(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(ind.has_edge(i, j), sub.has_edge(keep[i], keep[j]));
  }
}

TEST(PaletteWl, TargetsFirstAndSelectionIgnoresLocalOrder) {
  for (std::uint64_t g = 0; g < 20; ++g) {
    const auto rg = random_graph(30, 0.15, 200 + g);
    const auto sub = whole_graph_subgraph(rg.adj, 0, 1);
    const auto order = palette_wl_order(sub, 10, 3);
    ASSERT_EQ(order.size(), 10u);
    EXPECT_EQ(order[0], 0u);
    EXPECT_EQ(order[1], 1u);

    std::vector<std::uint32_t> perm(sub.node_count());
    std::iota(perm.begin(), perm.end(), 0u);
    std::reverse(perm.begin() + 2, perm.end());
    const auto p = permuted(sub, perm);
    const auto porder = palette_wl_order(p, 10, 3);
    for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(p.nodes[porder[i]], sub.nodes[order[i]]);
  }
  const auto rg = random_graph(5, 0.5, 1);
  EXPECT_EQ(palette_wl_order(whole_graph_subgraph(rg.adj, 0, 1), 30, 1).size(), 5u);
}

TEST(PaletteWl, ColorsRefineStructurallyDistinctNodes) {
  // Star centered at 2 with leaves 3,4 and a pendant 5 off leaf 4.
  std::vector<std::vector<bool>> adj(6, std::vector<bool>(6, false));
  auto link = [&](int a, int b) { adj[a][b] = adj[b][a] = true; };
  link(0, 2);
  link(1, 2);
  link(2, 3);
  link(2, 4);
  link(4, 5);
  const auto sub = whole_graph_subgraph(adj, 0, 1);
  const std::vector<std::int32_t> flat(6, 1);
  const auto colors = wl_colors(sub, flat);
  EXPECT_EQ(colors[0], colors[1]);
  EXPECT_NE(colors[3], colors[4]);
}

TEST(EncodeLabels, ClampsToLmaxAndRejectsNegative) {
  const std::vector<std::int32_t> labels{0, 1, 3, 50};
  const auto t = encode_labels(labels, 4);
  EXPECT_EQ(t.shape(), (nn::Shape{4, 5}));
  EXPECT_EQ(t.at(0, 0), 1.0);
  EXPECT_EQ(t.at(2, 3), 1.0);
  EXPECT_EQ(t.at(3, 4), 1.0);
  const std::vector<std::int32_t> bad{-1};
  EXPECT_THROW(encode_labels(bad, 4), Error);
}

TEST(Subgraph, EdgeListIsReadable) {
  std::vector<std::vector<bool>> adj(3, std::vector<bool>(3, false));
  adj[0][2] = adj[2][0] = true;
  std::ostringstream out;
  write_edge_list(out, whole_graph_subgraph(adj, 0, 1));
  EXPECT_EQ(out.str(), "# nodes 0 1 2\n# hop 1\n0 2\n");
}
