// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace templink {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Unordered node pair, stored with first < second where it matters.
struct NodePair {
  NodeId u = 0;
  NodeId v = 0;

  NodePair canonical() const noexcept { return u < v ? *this : NodePair{v, u}; }
  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct TransactionEvent {
  std::int64_t timestamp = 0;  // seconds since epoch
  std::int64_t amount = 0;     // minor currency units, > 0
  std::uint16_t currency = 0;  // < currency count
  /// Transfers only: 0 when the lower node id sent, 1 otherwise. Purchases: 0.
  std::uint8_t direction = 0;

  friend bool operator==(const TransactionEvent&, const TransactionEvent&) = default;
  friend auto operator<=>(const TransactionEvent&, const TransactionEvent&) = default;
};

/// Half-open interval [begin, end).
struct TimeWindow {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t t) const noexcept { return begin <= t && t < end; }
  std::int64_t length() const noexcept { return end - begin; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct DatasetHeader {
  std::uint32_t node_count = 0;
  std::uint16_t currencies = 1;
  std::int64_t t_min = 0;
  std::int64_t t_max = 0;  // inclusive

  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct PurchaseRow {
  NodeId node = 0;
  TransactionEvent event;
};

struct TransferRow {
  NodeId src = 0;
  NodeId dst = 0;
  std::int64_t timestamp = 0;
  std::int64_t amount = 0;
  std::uint16_t currency = 0;
};

/// Immutable undirected transaction graph in CSR form. Every edge is one
/// unordered pair carrying the merged series of all transfers between its
/// endpoints; neighbor lists are sorted ascending and event lists by time.
class TemporalGraph {
 public:
  TemporalGraph() = default;

  /// Validates rows against the header and builds the CSR. Transfers in either
  /// direction between the same pair merge into one edge.
  static TemporalGraph build(const DatasetHeader& header, std::vector<PurchaseRow> purchases,
                             std::vector<TransferRow> transfers);

  std::size_t node_count() const noexcept { return header_.node_count; }
  std::size_t edge_count() const noexcept { return edge_u_.size(); }
  std::uint16_t currencies() const noexcept { return header_.currencies; }
  const DatasetHeader& header() const noexcept { return header_; }
  /// [t_min, t_max + 1), the window that activates every edge.
  TimeWindow full_window() const noexcept { return {header_.t_min, header_.t_max + 1}; }

  std::span<const NodeId> neighbors(NodeId u) const;
  /// Edge ids parallel to neighbors(u).
  std::span<const EdgeId> incident_edges(NodeId u) const;
  NodePair endpoints(EdgeId e) const { return {edge_u_.at(e), edge_v_.at(e)}; }
  std::optional<EdgeId> find_edge(NodeId u, NodeId v) const;

  std::span<const TransactionEvent> edge_events(EdgeId e) const;
  std::span<const TransactionEvent> node_events(NodeId u) const;

  friend bool operator==(const TemporalGraph&, const TemporalGraph&) = default;

  friend void save_cache(const TemporalGraph& graph, const std::filesystem::path& path);
  friend TemporalGraph load_cache(const std::filesystem::path& path);

 private:
  DatasetHeader header_;
  std::vector<std::uint64_t> offsets_;  // n + 1
  std::vector<NodeId> targets_;
  std::vector<EdgeId> slot_edge_;
  std::vector<NodeId> edge_u_;  // edge_u_[e] < edge_v_[e]
  std::vector<NodeId> edge_v_;
  std::vector<std::uint64_t> edge_event_offsets_;
  std::vector<TransactionEvent> edge_events_;
  std::vector<std::uint64_t> node_event_offsets_;
  std::vector<TransactionEvent> node_events_;
};

/// Window-restricted adjacency over a TemporalGraph. An edge is active iff at
/// least one of its transfers falls inside the window. The base graph must
/// outlive the view.
class GraphView {
 public:
  GraphView(const TemporalGraph& base, TimeWindow window);

  const TemporalGraph& base() const noexcept { return *base_; }
  TimeWindow window() const noexcept { return window_; }
  std::size_t node_count() const noexcept { return base_->node_count(); }
  bool active(EdgeId e) const { return active_.at(e); }
  std::size_t active_edge_count() const noexcept { return active_count_; }

  std::vector<NodeId> neighbors(NodeId u) const;
  std::size_t degree(NodeId u) const;
  bool adjacent(NodeId u, NodeId v) const;

  /// Calls fn(neighbor, edge) for every active edge at u, neighbors ascending.
  template <class F>
  void for_each_neighbor(NodeId u, F&& fn) const {
    const auto nbrs = base_->neighbors(u);
    const auto edges = base_->incident_edges(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (active_[edges[i]]) fn(nbrs[i], edges[i]);
    }
  }

 private:
  void check_node(NodeId u) const;

  const TemporalGraph* base_;
  TimeWindow window_;
  std::vector<bool> active_;
  std::vector<std::uint32_t> degree_;
  std::size_t active_count_ = 0;
};

/// Restricts `graph` to `window`. The window must be non-empty and lie inside
/// the graph's time span.
GraphView restrict(const TemporalGraph& graph, TimeWindow window);

DatasetHeader read_header(const std::filesystem::path& path);
void write_header(const DatasetHeader& header, const std::filesystem::path& path);

/// Loads the CSV pair plus the `header.txt` sidecar next to the nodes file.
TemporalGraph load_dataset(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& transfers_path);
TemporalGraph load_dataset(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& transfers_path,
                           const std::filesystem::path& header_path);
/// Loads nodes.csv / transfers.csv / header.txt from one directory.
TemporalGraph load_dataset_dir(const std::filesystem::path& dir);

/// Writes nodes.csv, transfers.csv and header.txt in canonical order.
void write_dataset(const TemporalGraph& graph, const std::filesystem::path& dir);

/// Versioned binary image of a graph for fast reload.
void save_cache(const TemporalGraph& graph, const std::filesystem::path& path);
TemporalGraph load_cache(const std::filesystem::path& path);

}  // namespace templink
