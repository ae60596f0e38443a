// SPDX-License-Identifier: Apache-2.0
#include "templink/graph_store.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include "templink/config.hpp"
#include "templink/error.hpp"
#include "templink/io.hpp"

namespace templink {

namespace {

constexpr std::array<char, 8> kCacheMagic = {'T', 'L', 'G', 'R', 'A', 'P', 'H', '\0'};
constexpr std::uint32_t kCacheVersion = 1;

constexpr std::string_view kNodesHeader = "node_id,timestamp,amount,currency";
constexpr std::string_view kTransfersHeader = "src_id,dst_id,timestamp,amount,currency";

std::string event_problem(const DatasetHeader& h, std::int64_t ts, std::int64_t amount,
                          std::uint32_t currency) {
  if (amount <= 0) return "non-positive amount " + std::to_string(amount);
  if (currency >= h.currencies) {
    return "currency " + std::to_string(currency) + " outside 0.." +
           std::to_string(h.currencies - 1);
  }
  if (ts < h.t_min || ts > h.t_max) {
    return "timestamp " + std::to_string(ts) + " outside [" + std::to_string(h.t_min) + ", " +
           std::to_string(h.t_max) + "]";
  }
  return {};
}

template <class T>
void write_pod_vector(std::ofstream& out, const std::vector<T>& v) {
  const std::uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  if (n != 0) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}

template <class T>
void read_pod_vector(std::ifstream& in, std::vector<T>& v, const std::filesystem::path& path) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n > (1ULL << 40)) fail(ErrorCode::parse_error, path.string() + ": truncated cache");
  v.resize(n);
  if (n != 0) in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) fail(ErrorCode::parse_error, path.string() + ": truncated cache");
}

void write_events(std::ofstream& out, const std::vector<TransactionEvent>& events) {
  const std::uint64_t n = events.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& e : events) {
    out.write(reinterpret_cast<const char*>(&e.timestamp), sizeof(e.timestamp));
    out.write(reinterpret_cast<const char*>(&e.amount), sizeof(e.amount));
    out.write(reinterpret_cast<const char*>(&e.currency), sizeof(e.currency));
    out.write(reinterpret_cast<const char*>(&e.direction), sizeof(e.direction));
  }
}

void read_events(std::ifstream& in, std::vector<TransactionEvent>& events,
                 const std::filesystem::path& path) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n > (1ULL << 40)) fail(ErrorCode::parse_error, path.string() + ": truncated cache");
  events.resize(n);
  for (auto& e : events) {
    in.read(reinterpret_cast<char*>(&e.timestamp), sizeof(e.timestamp));
    in.read(reinterpret_cast<char*>(&e.amount), sizeof(e.amount));
    in.read(reinterpret_cast<char*>(&e.currency), sizeof(e.currency));
    in.read(reinterpret_cast<char*>(&e.direction), sizeof(e.direction));
  }
  if (!in) fail(ErrorCode::parse_error, path.string() + ": truncated cache");
}

}  // namespace

TemporalGraph TemporalGraph::build(const DatasetHeader& header, std::vector<PurchaseRow> purchases,
                                   std::vector<TransferRow> transfers) {
  if (header.node_count == 0) fail(ErrorCode::invalid_argument, "dataset has no nodes");
  if (header.currencies == 0) fail(ErrorCode::invalid_argument, "currency count must be positive");
  if (header.t_min > header.t_max) fail(ErrorCode::invalid_argument, "t_min > t_max");
  const auto n = header.node_count;

  for (std::size_t i = 0; i < purchases.size(); ++i) {
    const auto& p = purchases[i];
    if (p.node >= n) fail(ErrorCode::invalid_argument, "purchase row " + std::to_string(i) + ": node id out of range");
    auto why = event_problem(header, p.event.timestamp, p.event.amount, p.event.currency);
    if (!why.empty()) fail(ErrorCode::invalid_argument, "purchase row " + std::to_string(i) + ": " + why);
  }
  for (std::size_t i = 0; i < transfers.size(); ++i) {
    const auto& t = transfers[i];
    if (t.src >= n || t.dst >= n) {
      fail(ErrorCode::invalid_argument, "transfer row " + std::to_string(i) + ": node id out of range");
    }
    if (t.src == t.dst) fail(ErrorCode::invalid_argument, "transfer row " + std::to_string(i) + ": self-loop");
    auto why = event_problem(header, t.timestamp, t.amount, t.currency);
    if (!why.empty()) fail(ErrorCode::invalid_argument, "transfer row " + std::to_string(i) + ": " + why);
  }

  TemporalGraph g;
  g.header_ = header;

  // Node series.
  std::sort(purchases.begin(), purchases.end(), [](const PurchaseRow& a, const PurchaseRow& b) {
    return a.node != b.node ? a.node < b.node : a.event < b.event;
  });
  g.node_event_offsets_.assign(n + 1, 0);
  g.node_events_.reserve(purchases.size());
  for (const auto& p : purchases) {
    ++g.node_event_offsets_[p.node + 1];
    g.node_events_.push_back(p.event);
  }
  for (std::size_t i = 0; i < n; ++i) g.node_event_offsets_[i + 1] += g.node_event_offsets_[i];

  // Edge series: collapse direction into the event record and group by pair.
  struct Keyed {
    NodeId u, v;
    TransactionEvent event;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(transfers.size());
  for (const auto& t : transfers) {
    const bool forward = t.src < t.dst;
    keyed.push_back({forward ? t.src : t.dst, forward ? t.dst : t.src,
                     TransactionEvent{t.timestamp, t.amount, t.currency,
                                      static_cast<std::uint8_t>(forward ? 0 : 1)}});
  }
  transfers.clear();
  transfers.shrink_to_fit();
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.u != b.u) return a.u < b.u;
    if (a.v != b.v) return a.v < b.v;
    return a.event < b.event;
  });
  g.edge_event_offsets_.push_back(0);
  g.edge_events_.reserve(keyed.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i == 0 || keyed[i].u != keyed[i - 1].u || keyed[i].v != keyed[i - 1].v) {
      if (i != 0) g.edge_event_offsets_.push_back(g.edge_events_.size());
      g.edge_u_.push_back(keyed[i].u);
      g.edge_v_.push_back(keyed[i].v);
    }
    g.edge_events_.push_back(keyed[i].event);
  }
  if (!keyed.empty()) g.edge_event_offsets_.push_back(g.edge_events_.size());

  // CSR. Edges are sorted by (u, v), so appending in edge order leaves every
  // neighbor list ascending: lower-id partners arrive first, then higher.
  const std::size_t m = g.edge_u_.size();
  g.offsets_.assign(n + 1, 0);
  for (std::size_t e = 0; e < m; ++e) {
    ++g.offsets_[g.edge_u_[e] + 1];
    ++g.offsets_[g.edge_v_[e] + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.targets_.resize(2 * m);
  g.slot_edge_.resize(2 * m);
  std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t e = 0; e < m; ++e) {
    const auto u = g.edge_u_[e];
    const auto v = g.edge_v_[e];
    g.targets_[cursor[u]] = v;
    g.slot_edge_[cursor[u]++] = static_cast<EdgeId>(e);
    g.targets_[cursor[v]] = u;
    g.slot_edge_[cursor[v]++] = static_cast<EdgeId>(e);
  }
  return g;
}

std::span<const NodeId> TemporalGraph::neighbors(NodeId u) const {
  if (u >= node_count()) fail(ErrorCode::invalid_argument, "node id " + std::to_string(u) + " out of range");
  return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
}

std::span<const EdgeId> TemporalGraph::incident_edges(NodeId u) const {
  if (u >= node_count()) fail(ErrorCode::invalid_argument, "node id " + std::to_string(u) + " out of range");
  return {slot_edge_.data() + offsets_[u], slot_edge_.data() + offsets_[u + 1]};
}

std::optional<EdgeId> TemporalGraph::find_edge(NodeId u, NodeId v) const {
  const auto nbrs = neighbors(u);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v);
  if (it == nbrs.end() || *it != v) return std::nullopt;
  return slot_edge_[offsets_[u] + static_cast<std::size_t>(it - nbrs.begin())];
}

std::span<const TransactionEvent> TemporalGraph::edge_events(EdgeId e) const {
  if (e >= edge_count()) fail(ErrorCode::invalid_argument, "edge id out of range");
  return {edge_events_.data() + edge_event_offsets_[e], edge_events_.data() + edge_event_offsets_[e + 1]};
}

std::span<const TransactionEvent> TemporalGraph::node_events(NodeId u) const {
  if (u >= node_count()) fail(ErrorCode::invalid_argument, "node id out of range");
  return {node_events_.data() + node_event_offsets_[u], node_events_.data() + node_event_offsets_[u + 1]};
}

GraphView::GraphView(const TemporalGraph& base, TimeWindow window)
    : base_(&base), window_(window), active_(base.edge_count(), false), degree_(base.node_count(), 0) {
  const auto full = base.full_window();
  if (window.end <= window.begin) fail(ErrorCode::invalid_argument, "empty or inverted window");
  if (window.begin < full.begin || window.end > full.end) {
    fail(ErrorCode::invalid_argument, "window outside the graph time span");
  }
  for (EdgeId e = 0; e < base.edge_count(); ++e) {
    const auto ev = base.edge_events(e);
    auto it = std::lower_bound(ev.begin(), ev.end(), window.begin,
                               [](const TransactionEvent& a, std::int64_t t) { return a.timestamp < t; });
    if (it != ev.end() && it->timestamp < window.end) {
      active_[e] = true;
      ++active_count_;
      const auto [u, v] = base.endpoints(e);
      ++degree_[u];
      ++degree_[v];
    }
  }
}

void GraphView::check_node(NodeId u) const {
  if (u >= node_count()) fail(ErrorCode::invalid_argument, "node id " + std::to_string(u) + " out of range");
}

std::vector<NodeId> GraphView::neighbors(NodeId u) const {
  check_node(u);
  std::vector<NodeId> out;
  out.reserve(degree_[u]);
  for_each_neighbor(u, [&](NodeId v, EdgeId) { out.push_back(v); });
  return out;
}

std::size_t GraphView::degree(NodeId u) const {
  check_node(u);
  return degree_[u];
}

bool GraphView::adjacent(NodeId u, NodeId v) const {
  check_node(u);
  check_node(v);
  auto e = base_->find_edge(u, v);
  return e && active_[*e];
}

GraphView restrict(const TemporalGraph& graph, TimeWindow window) { return GraphView(graph, window); }

DatasetHeader read_header(const std::filesystem::path& path) {
  const auto cfg = Config::load(path);
  for (const char* key : {"n", "currencies", "t_min", "t_max"}) {
    if (!cfg.has(key)) fail(ErrorCode::parse_error, path.string() + ": missing key '" + key + "'");
  }
  DatasetHeader h;
  const auto n = cfg.get_int("n", 0);
  const auto c = cfg.get_int("currencies", 0);
  if (n <= 0 || n > 0xffffffffLL) fail(ErrorCode::parse_error, path.string() + ": invalid n");
  if (c <= 0 || c > 0xffff) fail(ErrorCode::parse_error, path.string() + ": invalid currencies");
  h.node_count = static_cast<std::uint32_t>(n);
  h.currencies = static_cast<std::uint16_t>(c);
  h.t_min = cfg.get_int("t_min", 0);
  h.t_max = cfg.get_int("t_max", 0);
  if (h.t_min > h.t_max) fail(ErrorCode::parse_error, path.string() + ": t_min > t_max");
  return h;
}

void write_header(const DatasetHeader& header, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "n=" << header.node_count << "\ncurrencies=" << header.currencies
      << "\nt_min=" << header.t_min << "\nt_max=" << header.t_max << "\n";
}

TemporalGraph load_dataset(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& transfers_path) {
  return load_dataset(nodes_path, transfers_path, nodes_path.parent_path() / "header.txt");
}

TemporalGraph load_dataset(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& transfers_path,
                           const std::filesystem::path& header_path) {
  const auto header = read_header(header_path);
  std::vector<std::string_view> f;

  std::vector<PurchaseRow> purchases;
  {
    CsvReader r(nodes_path, kNodesHeader);
    while (r.next(f)) {
      if (f.size() != 4) r.error("expected 4 fields, got " + std::to_string(f.size()));
      PurchaseRow row;
      row.node = parse_field<NodeId>(r, f[0], "node_id");
      row.event.timestamp = parse_field<std::int64_t>(r, f[1], "timestamp");
      row.event.amount = parse_field<std::int64_t>(r, f[2], "amount");
      const auto cur = parse_field<std::uint32_t>(r, f[3], "currency");
      if (row.node >= header.node_count) r.error("node id " + std::to_string(row.node) + " not dense in 0..n-1");
      auto why = event_problem(header, row.event.timestamp, row.event.amount, cur);
      if (!why.empty()) r.error(why);
      row.event.currency = static_cast<std::uint16_t>(cur);
      purchases.push_back(row);
    }
  }

  std::vector<TransferRow> transfers;
  {
    CsvReader r(transfers_path, kTransfersHeader);
    while (r.next(f)) {
      if (f.size() != 5) r.error("expected 5 fields, got " + std::to_string(f.size()));
      TransferRow row;
      row.src = parse_field<NodeId>(r, f[0], "src_id");
      row.dst = parse_field<NodeId>(r, f[1], "dst_id");
      row.timestamp = parse_field<std::int64_t>(r, f[2], "timestamp");
      row.amount = parse_field<std::int64_t>(r, f[3], "amount");
      const auto cur = parse_field<std::uint32_t>(r, f[4], "currency");
      if (row.src >= header.node_count || row.dst >= header.node_count) {
        r.error("node id not dense in 0.." + std::to_string(header.node_count - 1));
      }
      if (row.src == row.dst) r.error("self-loop transfer");
      auto why = event_problem(header, row.timestamp, row.amount, cur);
      if (!why.empty()) r.error(why);
      row.currency = static_cast<std::uint16_t>(cur);
      transfers.push_back(row);
    }
  }
  return TemporalGraph::build(header, std::move(purchases), std::move(transfers));
}

TemporalGraph load_dataset_dir(const std::filesystem::path& dir) {
  return load_dataset(dir / "nodes.csv", dir / "transfers.csv", dir / "header.txt");
}

void write_dataset(const TemporalGraph& graph, const std::filesystem::path& dir) {
  write_header(graph.header(), dir / "header.txt");
  {
    auto out = open_output(dir / "nodes.csv");
    out << kNodesHeader << '\n';
    for (NodeId u = 0; u < graph.node_count(); ++u) {
      for (const auto& e : graph.node_events(u)) {
        out << u << ',' << e.timestamp << ',' << e.amount << ',' << e.currency << '\n';
      }
    }
  }
  auto out = open_output(dir / "transfers.csv");
  out << kTransfersHeader << '\n';
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    const auto [u, v] = graph.endpoints(e);
    for (const auto& ev : graph.edge_events(e)) {
      const NodeId src = ev.direction == 0 ? u : v;
      const NodeId dst = ev.direction == 0 ? v : u;
      out << src << ',' << dst << ',' << ev.timestamp << ',' << ev.amount << ',' << ev.currency << '\n';
    }
  }
}

void save_cache(const TemporalGraph& g, const std::filesystem::path& path) {
  auto out = open_output(path);
  out.write(kCacheMagic.data(), kCacheMagic.size());
  out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof(kCacheVersion));
  out.write(reinterpret_cast<const char*>(&g.header_.node_count), sizeof(g.header_.node_count));
  out.write(reinterpret_cast<const char*>(&g.header_.currencies), sizeof(g.header_.currencies));
  out.write(reinterpret_cast<const char*>(&g.header_.t_min), sizeof(g.header_.t_min));
  out.write(reinterpret_cast<const char*>(&g.header_.t_max), sizeof(g.header_.t_max));
  write_pod_vector(out, g.offsets_);
  write_pod_vector(out, g.targets_);
  write_pod_vector(out, g.slot_edge_);
  write_pod_vector(out, g.edge_u_);
  write_pod_vector(out, g.edge_v_);
  write_pod_vector(out, g.edge_event_offsets_);
  write_events(out, g.edge_events_);
  write_pod_vector(out, g.node_event_offsets_);
  write_events(out, g.node_events_);
  if (!out) fail(ErrorCode::io_error, "failed writing " + path.string());
}

TemporalGraph load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::array<char, 8> magic{};
  std::uint32_t version = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || magic != kCacheMagic) fail(ErrorCode::parse_error, path.string() + ": not a graph cache");
  if (version != kCacheVersion) {
    fail(ErrorCode::parse_error, path.string() + ": unsupported cache version " + std::to_string(version));
  }
  TemporalGraph g;
  in.read(reinterpret_cast<char*>(&g.header_.node_count), sizeof(g.header_.node_count));
  in.read(reinterpret_cast<char*>(&g.header_.currencies), sizeof(g.header_.currencies));
  in.read(reinterpret_cast<char*>(&g.header_.t_min), sizeof(g.header_.t_min));
  in.read(reinterpret_cast<char*>(&g.header_.t_max), sizeof(g.header_.t_max));
  read_pod_vector(in, g.offsets_, path);
  read_pod_vector(in, g.targets_, path);
  read_pod_vector(in, g.slot_edge_, path);
  read_pod_vector(in, g.edge_u_, path);
  read_pod_vector(in, g.edge_v_, path);
  read_pod_vector(in, g.edge_event_offsets_, path);
  read_events(in, g.edge_events_, path);
  read_pod_vector(in, g.node_event_offsets_, path);
  read_events(in, g.node_events_, path);
  if (g.offsets_.size() != g.header_.node_count + 1ULL ||
      g.node_event_offsets_.size() != g.header_.node_count + 1ULL) {
    fail(ErrorCode::parse_error, path.string() + ": inconsistent cache");
  }
  return g;
}

}  // namespace templink
