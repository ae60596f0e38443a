// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "templink/graph_store.hpp"
#include "templink/nn/tensor.hpp"

namespace templink {

struct FeatureConfig {
  std::size_t period_steps = 12;  // bins per observation window
  bool log_amounts = true;
};

/// Binned event sequences, data shaped [batch, steps, 3 + C]. Every series is
/// binned over the same window, so lengths are all `steps`; the field exists
/// so consumers can mask ragged inputs.
struct SequenceBatch {
  nn::Tensor data;
  std::vector<std::uint32_t> lengths;
  std::int64_t period = 0;

  std::size_t batch() const { return data.rank() == 3 ? data.shape()[0] : 0; }
  std::size_t steps() const { return data.rank() == 3 ? data.shape()[1] : 0; }
  std::size_t feat_dim() const { return data.rank() == 3 ? data.shape()[2] : 0; }
};

inline std::size_t feature_dim(std::size_t currencies) { return 3 + currencies; }

/// Fixed-width bins covering `window`, the last one possibly partial.
std::size_t step_count(TimeWindow window, std::int64_t period);

/// Period that splits `window` into `steps` bins (ceil(length / steps)).
std::int64_t default_period(TimeWindow window, std::size_t steps);

/// Per-bin [count, log1p(total), log1p(mean), per-currency counts] written
/// row-major into `out` (steps * (3 + C) values, overwritten). Events outside
/// the window are ignored.
void bin_series(std::span<const TransactionEvent> events, TimeWindow window, std::int64_t period,
                std::size_t currencies, std::span<double> out, bool log_amounts = true);
std::vector<double> bin_series(std::span<const TransactionEvent> events, TimeWindow window, std::int64_t period,
                               std::size_t currencies, bool log_amounts = true);

/// Row i holds the transfer series between edges[i].u and edges[i].v inside
/// the view's window; pairs without an edge produce all-zero rows.
SequenceBatch batch_edges(const GraphView& view, std::span<const NodePair> edges, std::int64_t period,
                          bool log_amounts = true);
/// Row i holds the purchase series of nodes[i] inside the view's window.
SequenceBatch batch_nodes(const GraphView& view, std::span<const NodeId> nodes, std::int64_t period,
                          bool log_amounts = true);

}  // namespace templink
