// SPDX-License-Identifier: Apache-2.0
#include "templink/features.hpp"

#include <algorithm>
#include <cmath>

#include "templink/error.hpp"
#include "templink/parallel.hpp"

namespace templink {

std::size_t step_count(TimeWindow window, std::int64_t period) {
  if (period <= 0) fail(ErrorCode::invalid_argument, "bin period must be positive, got " + std::to_string(period));
  if (window.length() <= 0) fail(ErrorCode::invalid_argument, "empty binning window");
  return static_cast<std::size_t>((window.length() + period - 1) / period);
}

std::int64_t default_period(TimeWindow window, std::size_t steps) {
  if (steps == 0) fail(ErrorCode::config_error, "feature.period_steps must be positive");
  if (window.length() <= 0) fail(ErrorCode::invalid_argument, "empty binning window");
  const auto s = static_cast<std::int64_t>(steps);
  return (window.length() + s - 1) / s;
}

void bin_series(std::span<const TransactionEvent> events, TimeWindow window, std::int64_t period,
                std::size_t currencies, std::span<double> out, bool log_amounts) {
  const std::size_t steps = step_count(window, period);
  const std::size_t width = feature_dim(currencies);
  if (out.size() != steps * width) fail(ErrorCode::invalid_argument, "bin_series: output buffer has wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  // Column 1 accumulates raw totals first; the log transform runs once at the end.
  auto first = std::lower_bound(events.begin(), events.end(), window.begin,
                                [](const TransactionEvent& e, std::int64_t t) { return e.timestamp < t; });
  for (auto it = first; it != events.end() && it->timestamp < window.end; ++it) {
    if (it->currency >= currencies) fail(ErrorCode::invalid_argument, "bin_series: currency out of range");
    const auto k = static_cast<std::size_t>((it->timestamp - window.begin) / period);
    double* row = out.data() + k * width;
    row[0] += 1.0;
    row[1] += static_cast<double>(it->amount);
    row[3 + it->currency] += 1.0;
  }
  for (std::size_t k = 0; k < steps; ++k) {
    double* row = out.data() + k * width;
    if (row[0] == 0.0) continue;
    const double total = row[1];
    const double mean = total / row[0];
    row[1] = log_amounts ? std::log1p(total) : total;
    row[2] = log_amounts ? std::log1p(mean) : mean;
  }
}

std::vector<double> bin_series(std::span<const TransactionEvent> events, TimeWindow window, std::int64_t period,
                               std::size_t currencies, bool log_amounts) {
  std::vector<double> out(step_count(window, period) * feature_dim(currencies));
  bin_series(events, window, period, currencies, out, log_amounts);
  return out;
}

namespace {

template <class EventsOf>
SequenceBatch batch_series(const GraphView& view, std::size_t count, std::int64_t period, bool log_amounts,
                           EventsOf events_of) {
  const std::size_t steps = step_count(view.window(), period);
  const std::size_t width = feature_dim(view.base().currencies());
  SequenceBatch batch;
  batch.period = period;
  batch.data = nn::Tensor({count, steps, width});
  batch.lengths.assign(count, static_cast<std::uint32_t>(steps));
  double* base = batch.data.data();
  parallel_for(count, [&](std::size_t i) {
    bin_series(events_of(i), view.window(), period, view.base().currencies(),
               std::span<double>(base + i * steps * width, steps * width), log_amounts);
  });
  return batch;
}

}  // namespace

SequenceBatch batch_edges(const GraphView& view, std::span<const NodePair> edges, std::int64_t period,
                          bool log_amounts) {
  const auto& g = view.base();
  for (const auto& p : edges) {
    if (p.u >= g.node_count() || p.v >= g.node_count()) {
      fail(ErrorCode::invalid_argument, "batch_edges: node id out of range");
    }
  }
  return batch_series(view, edges.size(), period, log_amounts, [&](std::size_t i) {
    const auto e = g.find_edge(edges[i].u, edges[i].v);
    return e ? g.edge_events(*e) : std::span<const TransactionEvent>{};
  });
}

SequenceBatch batch_nodes(const GraphView& view, std::span<const NodeId> nodes, std::int64_t period,
                          bool log_amounts) {
  const auto& g = view.base();
  for (NodeId u : nodes) {
    if (u >= g.node_count()) fail(ErrorCode::invalid_argument, "batch_nodes: node id out of range");
  }
  return batch_series(view, nodes.size(), period, log_amounts,
                      [&](std::size_t i) { return g.node_events(nodes[i]); });
}

}  // namespace templink
