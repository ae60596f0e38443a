// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "templink/config.hpp"
#include "templink/graph_store.hpp"

namespace templink {

enum class Protocol { out_of_time, edge_sampling };

/// Accepts oot / out_of_time and edge / edge_sampling.
Protocol parse_protocol(std::string_view name);
/// Short name used in file names and result rows: "oot" or "edge".
std::string_view to_string(Protocol p);

enum class Segment { train = 0, val = 1, test = 2 };
inline constexpr std::array<Segment, 3> kSegments = {Segment::train, Segment::val, Segment::test};
std::string_view to_string(Segment s);
Segment parse_segment(std::string_view name);

struct SplitConfig {
  Protocol protocol = Protocol::out_of_time;
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;
  std::int64_t t2 = 0;
  double alpha = 1.0;
  int neg_hops = 2;
  /// Users are partitioned by id into consecutive ranges of these fractions
  /// (train, val; test takes the rest).
  double train_frac = 0.6;
  double val_frac = 0.2;
  /// Per-segment cap on positives (0 = all), applied by seeded subsampling.
  std::size_t max_positives = 0;
  std::uint64_t seed = 0;

  TimeWindow observed() const { return {t0, t1}; }
  TimeWindow target() const { return {t1, t2}; }
  void validate() const;
  static SplitConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
};

struct Sample {
  NodePair pair;  // u < v
  int label = 0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct SampleSet {
  Segment segment = Segment::train;
  TimeWindow window;  // observed context
  /// Edge-sampling positives hide their own edge from the context view.
  bool hide_positive_edges = false;
  std::vector<Sample> samples;

  bool hides(const Sample& s) const { return hide_positive_edges && s.label == 1; }
  std::size_t positives() const;
};

struct Split {
  SplitConfig cfg;
  std::array<SampleSet, 3> sets;

  const SampleSet& operator[](Segment s) const { return sets[static_cast<int>(s)]; }
  SampleSet& operator[](Segment s) { return sets[static_cast<int>(s)]; }
};

/// Segment owning user `u` under the id-range plan, for an n-node graph.
Segment segment_of(NodeId u, std::size_t n, const SplitConfig& cfg);

/// Positives: pairs inside one segment with a transfer in [t1, t2).
/// Negatives: alpha * positives pairs drawn uniformly from pairs within
/// neg_hops of each other in the observed view that have no such transfer.
Split out_of_time_split(const TemporalGraph& graph, const SplitConfig& cfg);

/// Positives: observed edges inside one segment. Negatives: alpha *
/// positives uniformly drawn non-adjacent pairs inside the segment.
Split edge_sampling_split(const TemporalGraph& graph, const SplitConfig& cfg);

Split make_split(const TemporalGraph& graph, const SplitConfig& cfg);

/// samples.csv (`u,v,label,segment`) plus split.cfg manifest.
void write_split(const Split& split, const std::filesystem::path& dir);
Split read_split(const std::filesystem::path& dir);

}  // namespace templink
