// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "support/oracles.hpp"
#include "templink/error.hpp"
#include "templink/evaluation.hpp"
#include "templink/heuristics.hpp"
#include "templink/io.hpp"
#include "templink/rng.hpp"

namespace fs = std::filesystem;
using namespace templink;
using templink::check::brute_auc;
using templink::check::brute_heuristic;
using templink::check::random_graph;

TEST(Heuristics, HandWorkedScores) {
  // 0 and 1 share neighbors 2 (degree 3) and 3 (degree 2); 0-1 adjacent.
  std::vector<std::vector<bool>> adj(5, std::vector<bool>(5, false));
  auto link = [&](int a, int b) { adj[a][b] = adj[b][a] = true; };
  link(0, 1);
  link(0, 2);
  link(1, 2);
  link(0, 3);
  link(1, 3);
  link(2, 4);
  std::vector<TransferRow> transfers;
  for (NodeId a = 0; a < 5; ++a) {
    for (NodeId b = a + 1; b < 5; ++b) {
      if (adj[a][b]) transfers.push_back({a, b, 1, 1, 0});
    }
  }
  const auto g = TemporalGraph::build({5, 1, 0, 9}, {}, transfers);
  const auto view = restrict(g, g.full_window());
  EXPECT_EQ(heuristic_score(HeuristicKind::cn, view, 0, 1), 2.0);
  EXPECT_EQ(heuristic_score(HeuristicKind::ra, view, 0, 1), 1.0 / 3.0 + 1.0 / 2.0);
  EXPECT_EQ(heuristic_score(HeuristicKind::aa, view, 0, 1), 1.0 / std::log(3.0) + 1.0 / std::log(2.0));
  EXPECT_EQ(heuristic_score(HeuristicKind::pa, view, 0, 1), 9.0);
  EXPECT_EQ(heuristic_score(HeuristicKind::pa, view, 0, 1, true), 4.0);
  // union without hiding includes each other: {1,2,3} u {0,2,3}
  EXPECT_EQ(heuristic_score(HeuristicKind::jaccard, view, 0, 1), 2.0 / 4.0);
  EXPECT_EQ(heuristic_score(HeuristicKind::jaccard, view, 0, 1, true), 1.0);
  EXPECT_EQ(heuristic_score(HeuristicKind::jaccard, view, 4, 3), 0.0);
}

TEST(Heuristics, ExactlyMatchBruteForce) {
  Rng pick(17, {});
  for (std::uint64_t g = 0; g < 30; ++g) {
    const std::size_t n = 5 + pick.below(96);
    const auto rg = random_graph(n, 0.08, 300 + g);
    const auto view = restrict(rg.graph, rg.graph.full_window());
    for (int trial = 0; trial < 20; ++trial) {
      const auto u = static_cast<NodeId>(pick.below(n));
      auto v = static_cast<NodeId>(pick.below(n - 1));
      if (v >= u) ++v;
      for (auto kind : kAllHeuristics) {
        for (bool hide : {false, true}) {
          ASSERT_EQ(heuristic_score(kind, view, u, v, hide), brute_heuristic(kind, rg.adj, u, v, hide))
              << to_string(kind) << " graph " << g << " pair " << u << "," << v;
        }
      }
    }
  }
}

TEST(Heuristics, NamesRoundTrip) {
  for (auto kind : kAllHeuristics) EXPECT_EQ(parse_heuristic(to_string(kind)), kind);
  EXPECT_THROW(parse_heuristic("XYZ"), Error);
}

TEST(Auc, HandWorkedWithTies) {
  const std::vector<double> scores{0.9, 0.5, 0.5, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  // pairs: (0.9>0.5) (0.9>0.1) (0.5=0.5 -> 0.5) (0.5>0.1) = 3.5 / 4
  EXPECT_DOUBLE_EQ(roc_auc(scores, labels), 0.875);
  EXPECT_DOUBLE_EQ(gini(0.875), 0.75);
  const std::vector<int> one_class{1, 1, 1, 1};
  EXPECT_THROW(roc_auc(scores, one_class), Error);
}

TEST(Auc, MatchesPairCountingWithHeavyTies) {
  Rng rng(23, {});
  for (int set = 0; set < 30; ++set) {
    const std::size_t m = 2 + rng.below(1999);
    std::vector<double> scores(m);
    std::vector<int> labels(m);
    const std::uint64_t levels = 1 + rng.below(20);
    for (std::size_t i = 0; i < m; ++i) {
      scores[i] = static_cast<double>(rng.below(levels)) / 7.0;
      labels[i] = rng.bernoulli(0.3) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    EXPECT_NEAR(roc_auc(scores, labels), brute_auc(scores, labels), 1e-12) << "set " << set;
  }
}

TEST(Results, CsvRoundTripAndCanonicalReport) {
  const auto dir = fs::temp_directory_path() / "templink_test_report";
  fs::remove_all(dir);
  fs::create_directories(dir / "metrics");
  const ResultRow a{"SEAL", "oot", "sl", 7, 0.8, 100};
  const ResultRow b{"CN", "oot", "-", 7, 0.6, 100};
  write_results_csv(dir / "metrics" / "a.csv", {a});
  write_results_csv(dir / "metrics" / "b.csv", {b});
  const auto rows = report(dir / "metrics", dir, {{"oracle", "oot", "-", 7, 0.97, 100}});
  EXPECT_EQ(rows.size(), 3u);
  const auto back = read_results_csv(dir / "results.csv");
  EXPECT_EQ(back.size(), 3u);
  const auto text = read_file(dir / "results.csv");
  EXPECT_EQ(text.substr(0, std::string(kResultsHeader).size()), kResultsHeader);
  // Reordering inputs does not change the output.
  fs::remove(dir / "metrics" / "a.csv");
  write_results_csv(dir / "metrics" / "z.csv", {a});
  report(dir / "metrics", dir, {{"oracle", "oot", "-", 7, 0.97, 100}});
  EXPECT_EQ(read_file(dir / "results.csv"), text);
  EXPECT_THROW(report(dir / "nothing", dir), Error);
}
