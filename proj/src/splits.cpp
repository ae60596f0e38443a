// SPDX-License-Identifier: Apache-2.0
#include "templink/splits.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "templink/error.hpp"
#include "templink/io.hpp"
#include "templink/log.hpp"
#include "templink/rng.hpp"

namespace templink {

Protocol parse_protocol(std::string_view name) {
  if (name == "oot" || name == "out_of_time") return Protocol::out_of_time;
  if (name == "edge" || name == "edge_sampling") return Protocol::edge_sampling;
  fail(ErrorCode::invalid_argument, "unknown protocol '" + std::string(name) + "' (expected oot or edge)");
}

std::string_view to_string(Protocol p) { return p == Protocol::out_of_time ? "oot" : "edge"; }

std::string_view to_string(Segment s) {
  switch (s) {
    case Segment::train: return "train";
    case Segment::val: return "val";
    case Segment::test: return "test";
  }
  return "train";
}

Segment parse_segment(std::string_view name) {
  if (name == "train") return Segment::train;
  if (name == "val") return Segment::val;
  if (name == "test") return Segment::test;
  fail(ErrorCode::parse_error, "unknown segment '" + std::string(name) + "'");
}

void SplitConfig::validate() const {
  if (!(t0 < t1 && t1 < t2)) fail(ErrorCode::config_error, "split requires t0 < t1 < t2");
  if (!(alpha > 0.0)) fail(ErrorCode::config_error, "split.alpha must be positive");
  if (neg_hops < 1) fail(ErrorCode::config_error, "split.neg_hops must be at least 1");
  if (!(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0)) {
    fail(ErrorCode::config_error, "split fractions must be positive and leave room for the test segment");
  }
}

SplitConfig SplitConfig::from_config(const Config& cfg) {
  SplitConfig s;
  s.protocol = parse_protocol(cfg.get_string("split.protocol", "oot"));
  s.t0 = cfg.get_int("time.t0", 0);
  s.t1 = cfg.get_int("time.t1", 0);
  s.t2 = cfg.get_int("time.t2", 0);
  s.alpha = cfg.get_double("split.alpha", 1.0);
  s.neg_hops = static_cast<int>(cfg.get_int("split.neg_hops", 2));
  s.train_frac = cfg.get_double("split.train_frac", 0.6);
  s.val_frac = cfg.get_double("split.val_frac", 0.2);
  s.max_positives = static_cast<std::size_t>(cfg.get_int("split.max_positives", 0));
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  return s;
}

void SplitConfig::to_config(Config& cfg) const {
  cfg.set("split.protocol", std::string(to_string(protocol)));
  cfg.set("time.t0", std::to_string(t0));
  cfg.set("time.t1", std::to_string(t1));
  cfg.set("time.t2", std::to_string(t2));
  cfg.set("split.alpha", format_double(alpha));
  cfg.set("split.neg_hops", std::to_string(neg_hops));
  cfg.set("split.train_frac", format_double(train_frac));
  cfg.set("split.val_frac", format_double(val_frac));
  cfg.set("split.max_positives", std::to_string(max_positives));
  cfg.set("seed", std::to_string(seed));
}

std::size_t SampleSet::positives() const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const Sample& s) { return s.label == 1; }));
}

namespace {

struct Range {
  NodeId begin = 0;
  NodeId end = 0;
  bool contains(NodeId u) const { return begin <= u && u < end; }
  std::size_t size() const { return end - begin; }
};

Range segment_range(Segment s, std::size_t n, const SplitConfig& cfg) {
  const auto a = static_cast<NodeId>(std::floor(cfg.train_frac * static_cast<double>(n)));
  const auto b = static_cast<NodeId>(std::floor((cfg.train_frac + cfg.val_frac) * static_cast<double>(n)));
  switch (s) {
    case Segment::train: return {0, a};
    case Segment::val: return {a, b};
    case Segment::test: return {b, static_cast<NodeId>(n)};
  }
  return {};
}

bool has_event_in(std::span<const TransactionEvent> events, TimeWindow w) {
  auto it = std::lower_bound(events.begin(), events.end(), w.begin,
                             [](const TransactionEvent& e, std::int64_t t) { return e.timestamp < t; });
  return it != events.end() && it->timestamp < w.end;
}

bool future_linked(const TemporalGraph& g, NodeId u, NodeId v, TimeWindow target) {
  const auto e = g.find_edge(u, v);
  return e && has_event_in(g.edge_events(*e), target);
}

/// Nodes within `hops` of u in the view, ascending, u excluded.
void within_hops(const GraphView& view, NodeId u, int hops, std::vector<NodeId>& out) {
  out.clear();
  view.for_each_neighbor(u, [&](NodeId w, EdgeId) { out.push_back(w); });
  std::vector<NodeId> frontier = out;
  for (int h = 1; h < hops; ++h) {
    std::vector<NodeId> next;
    for (NodeId a : frontier) view.for_each_neighbor(a, [&](NodeId w, EdgeId) { next.push_back(w); });
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    std::vector<NodeId> fresh;
    std::set_difference(next.begin(), next.end(), out.begin(), out.end(), std::back_inserter(fresh));
    fresh.erase(std::remove(fresh.begin(), fresh.end(), u), fresh.end());
    std::vector<NodeId> merged;
    std::merge(out.begin(), out.end(), fresh.begin(), fresh.end(), std::back_inserter(merged));
    out = std::move(merged);
    frontier = std::move(fresh);
  }
}

/// k distinct values from [0, total), ascending (Floyd's algorithm).
std::vector<std::uint64_t> choose_indices(std::uint64_t total, std::uint64_t k, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint64_t j = total - k; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodePair> cap_positives(std::vector<NodePair> pos, const SplitConfig& cfg, Segment s) {
  if (cfg.max_positives == 0 || pos.size() <= cfg.max_positives) return pos;
  Rng rng(cfg.seed, {0x9051ULL, static_cast<std::uint64_t>(s)});
  auto kept = sample_without_replacement(std::move(pos), cfg.max_positives, rng);
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::size_t negative_count(std::size_t positives, double alpha) {
  return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(positives)));
}

void finish(SampleSet& set, const std::vector<NodePair>& pos, const std::vector<NodePair>& neg) {
  for (const auto& p : pos) set.samples.push_back({p, 1});
  for (const auto& p : neg) set.samples.push_back({p, 0});
  std::sort(set.samples.begin(), set.samples.end(),
            [](const Sample& a, const Sample& b) { return a.pair < b.pair; });
}

}  // namespace

Segment segment_of(NodeId u, std::size_t n, const SplitConfig& cfg) {
  for (Segment s : kSegments) {
    if (segment_range(s, n, cfg).contains(u)) return s;
  }
  fail(ErrorCode::invalid_argument, "node id out of range");
}

Split out_of_time_split(const TemporalGraph& graph, const SplitConfig& cfg) {
  cfg.validate();
  const GraphView view = restrict(graph, cfg.observed());
  restrict(graph, cfg.target());  // validates the target window against the span
  Split split;
  split.cfg = cfg;
  const std::size_t n = graph.node_count();
  for (Segment s : kSegments) {
    const Range r = segment_range(s, n, cfg);
    SampleSet& set = split[s];
    set.segment = s;
    set.window = cfg.observed();
    std::vector<NodePair> pos;
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      const auto p = graph.endpoints(e);
      if (r.contains(p.u) && r.contains(p.v) && has_event_in(graph.edge_events(e), cfg.target())) pos.push_back(p);
    }
    if (pos.empty()) fail(ErrorCode::invalid_argument, std::string("segment ") + std::string(to_string(s)) + " has no positives");
    pos = cap_positives(std::move(pos), cfg, s);

    // Count candidates per node, draw indices, then enumerate again to map
    // indices back to pairs; the result depends only on the seed.
    std::vector<std::uint64_t> counts(r.size());
    std::vector<NodeId> near;
    auto candidates = [&](NodeId u, auto&& emit) {
      within_hops(view, u, cfg.neg_hops, near);
      for (NodeId v : near) {
        if (v > u && r.contains(v) && !future_linked(graph, u, v, cfg.target())) emit(v);
      }
    };
    std::uint64_t total = 0;
    for (NodeId u = r.begin; u < r.end; ++u) {
      std::uint64_t c = 0;
      candidates(u, [&](NodeId) { ++c; });
      counts[u - r.begin] = c;
      total += c;
    }
    const std::size_t k = negative_count(pos.size(), cfg.alpha);
    if (k > total) {
      fail(ErrorCode::invalid_argument, std::string("segment ") + std::string(to_string(s)) + " needs " +
                                            std::to_string(k) + " negatives but only " + std::to_string(total) +
                                            " hop-" + std::to_string(cfg.neg_hops) + " candidates exist");
    }
    Rng rng(cfg.seed, {0x0e9ULL, static_cast<std::uint64_t>(s)});
    const auto picks = choose_indices(total, k, rng);
    std::vector<NodePair> neg;
    std::uint64_t base = 0;
    std::size_t next = 0;
    for (NodeId u = r.begin; u < r.end && next < picks.size(); ++u) {
      const std::uint64_t c = counts[u - r.begin];
      if (picks[next] < base + c) {
        std::uint64_t idx = base;
        candidates(u, [&](NodeId v) {
          if (next < picks.size() && picks[next] == idx) {
            neg.push_back({u, v});
            ++next;
          }
          ++idx;
        });
      }
      base += c;
    }
    finish(set, pos, neg);
    log_info("split oot ", to_string(s), ": ", pos.size(), " positives, ", neg.size(), " negatives from ", total,
             " candidates");
  }
  return split;
}

Split edge_sampling_split(const TemporalGraph& graph, const SplitConfig& cfg) {
  cfg.validate();
  const GraphView view = restrict(graph, cfg.observed());
  Split split;
  split.cfg = cfg;
  const std::size_t n = graph.node_count();
  for (Segment s : kSegments) {
    const Range r = segment_range(s, n, cfg);
    SampleSet& set = split[s];
    set.segment = s;
    set.window = cfg.observed();
    set.hide_positive_edges = true;
    std::vector<NodePair> pos;
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      const auto p = graph.endpoints(e);
      if (view.active(e) && r.contains(p.u) && r.contains(p.v)) pos.push_back(p);
    }
    if (pos.empty()) fail(ErrorCode::invalid_argument, std::string("segment ") + std::string(to_string(s)) + " has no positives");
    pos = cap_positives(std::move(pos), cfg, s);
    const std::size_t k = negative_count(pos.size(), cfg.alpha);
    const double pairs = 0.5 * static_cast<double>(r.size()) * static_cast<double>(r.size() - 1);
    if (static_cast<double>(k) > 0.5 * (pairs - static_cast<double>(view.active_edge_count()))) {
      fail(ErrorCode::invalid_argument, "segment too small for the requested number of negatives");
    }
    Rng rng(cfg.seed, {0xed9eULL, static_cast<std::uint64_t>(s)});
    std::unordered_set<std::uint64_t> taken;
    std::vector<NodePair> neg;
    while (neg.size() < k) {
      auto u = static_cast<NodeId>(r.begin + rng.below(r.size()));
      auto v = static_cast<NodeId>(r.begin + rng.below(r.size()));
      if (u == v || view.adjacent(u, v)) continue;
      if (u > v) std::swap(u, v);
      if (!taken.insert((static_cast<std::uint64_t>(u) << 32) | v).second) continue;
      neg.push_back({u, v});
    }
    finish(set, pos, neg);
    log_info("split edge ", to_string(s), ": ", pos.size(), " positives, ", neg.size(), " negatives");
  }
  return split;
}

Split make_split(const TemporalGraph& graph, const SplitConfig& cfg) {
  return cfg.protocol == Protocol::out_of_time ? out_of_time_split(graph, cfg) : edge_sampling_split(graph, cfg);
}

void write_split(const Split& split, const std::filesystem::path& dir) {
  auto out = open_output(dir / "samples.csv");
  out << "u,v,label,segment\n";
  for (const auto& set : split.sets) {
    for (const auto& s : set.samples) {
      out << s.pair.u << ',' << s.pair.v << ',' << s.label << ',' << to_string(set.segment) << '\n';
    }
  }
  if (!out) fail(ErrorCode::io_error, "failed writing " + (dir / "samples.csv").string());
  Config manifest;
  split.cfg.to_config(manifest);
  manifest.save(dir / "split.cfg");
}

Split read_split(const std::filesystem::path& dir) {
  Split split;
  split.cfg = SplitConfig::from_config(Config::load(dir / "split.cfg"));
  for (Segment s : kSegments) {
    split[s].segment = s;
    split[s].window = split.cfg.observed();
    split[s].hide_positive_edges = split.cfg.protocol == Protocol::edge_sampling;
  }
  CsvReader reader(dir / "samples.csv", "u,v,label,segment");
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 4) reader.error("expected 4 fields");
    Sample s;
    s.pair = NodePair{parse_field<NodeId>(reader, f[0], "u"), parse_field<NodeId>(reader, f[1], "v")}.canonical();
    s.label = parse_field<int>(reader, f[2], "label");
    if (s.label != 0 && s.label != 1) reader.error("label must be 0 or 1");
    split[parse_segment(f[3])].samples.push_back(s);
  }
  return split;
}

}  // namespace templink
