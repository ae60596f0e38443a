// SPDX-License-Identifier: Apache-2.0
#include "templink/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "templink/error.hpp"
#include "templink/io.hpp"
#include "templink/log.hpp"
#include "templink/nn/ops.hpp"
#include "templink/rng.hpp"

namespace templink {

namespace {

// Stream tags; every random draw is keyed by (seed, tag, entity ids).
enum Tag : std::uint64_t {
  kRing = 1,
  kIntra,
  kInter,
  kTie,
  kSeries,
  kFuture,
  kFutureSeries,
  kRisk,
  kPurchases,
  kCredit,
  kClosure,
};

using nn::sigmoid;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::int64_t to_time(std::int64_t begin, std::int64_t end, double frac) {
  auto t = begin + static_cast<std::int64_t>(std::floor(frac * static_cast<double>(end - begin)));
  return std::clamp(t, begin, end - 1);
}

std::int64_t draw_amount(Rng& rng, double mu, double sigma) {
  return std::max<std::int64_t>(1, std::llround(rng.lognormal(mu, sigma)));
}

}  // namespace

void GenConfig::validate() const {
  if (n < 2) fail(ErrorCode::config_error, "gen.n must be at least 2");
  if (communities == 0 || communities > n) fail(ErrorCode::config_error, "gen.communities must be in [1, n]");
  if (currencies == 0) fail(ErrorCode::config_error, "gen.currencies must be positive");
  if (!(t0 < t1 && t1 < t2)) fail(ErrorCode::config_error, "generator requires t0 < t1 < t2");
  if (!is_probability(ring_prob) || !is_probability(default_rate) || default_rate <= 0.0 || default_rate >= 1.0) {
    fail(ErrorCode::config_error, "gen.ring_prob and gen.default_rate must be probabilities (default_rate in (0,1))");
  }
  if (!(beta >= 0.0)) fail(ErrorCode::config_error, "gen.beta must be non-negative");
  if (ring_decay <= 0.0 || intra_rate < 0.0 || inter_rate < 0.0 || closure_rate < 0.0 || base_events < 0.0 || future_events < 0.0 ||
      purchase_rate < 0.0 || jitter < 0.0 || jitter > 1.0 || amount_sigma < 0.0) {
    fail(ErrorCode::config_error, "generator rates must be non-negative (ring_decay positive, jitter <= 1)");
  }
}

GenConfig GenConfig::from_config(const Config& c) {
  GenConfig g;
  g.n = static_cast<std::uint32_t>(c.get_int("gen.n", g.n));
  g.communities = static_cast<std::uint32_t>(c.get_int("gen.communities", g.communities));
  g.currencies = static_cast<std::uint16_t>(c.get_int("gen.currencies", g.currencies));
  g.t0 = c.get_int("time.t0", g.t0);
  g.t1 = c.get_int("time.t1", g.t1);
  g.t2 = c.get_int("time.t2", g.t2);
  g.ring_reach = static_cast<std::uint32_t>(c.get_int("gen.ring_reach", g.ring_reach));
  g.ring_prob = c.get_double("gen.ring_prob", g.ring_prob);
  g.ring_decay = c.get_double("gen.ring_decay", g.ring_decay);
  g.intra_rate = c.get_double("gen.intra_rate", g.intra_rate);
  g.inter_rate = c.get_double("gen.inter_rate", g.inter_rate);
  g.closure_rate = c.get_double("gen.closure_rate", g.closure_rate);
  g.beta = c.get_double("gen.beta", g.beta);
  g.base_events = c.get_double("gen.base_events", g.base_events);
  g.intensity_gain = c.get_double("gen.intensity_gain", g.intensity_gain);
  g.recency_gain = c.get_double("gen.recency_gain", g.recency_gain);
  g.jitter = c.get_double("gen.jitter", g.jitter);
  g.amount_mu = c.get_double("gen.amount_mu", g.amount_mu);
  g.amount_sigma = c.get_double("gen.amount_sigma", g.amount_sigma);
  g.cont_bias = c.get_double("gen.cont_bias", g.cont_bias);
  g.cont_topo = c.get_double("gen.cont_topo", g.cont_topo);
  g.cont_tie = c.get_double("gen.cont_tie", g.cont_tie);
  g.new_bias = c.get_double("gen.new_bias", g.new_bias);
  g.new_topo = c.get_double("gen.new_topo", g.new_topo);
  g.new_tie = c.get_double("gen.new_tie", g.new_tie);
  g.future_events = c.get_double("gen.future_events", g.future_events);
  g.purchase_rate = c.get_double("gen.purchase_rate", g.purchase_rate);
  g.risk_amount = c.get_double("gen.risk_amount", g.risk_amount);
  g.risk_trend = c.get_double("gen.risk_trend", g.risk_trend);
  g.default_rate = c.get_double("gen.default_rate", g.default_rate);
  g.credit_own = c.get_double("gen.credit_own", g.credit_own);
  g.credit_neighbors = c.get_double("gen.credit_neighbors", g.credit_neighbors);
  g.seed = static_cast<std::uint64_t>(c.get_int("seed", static_cast<std::int64_t>(g.seed)));
  return g;
}

void GenConfig::to_config(Config& c) const {
  auto d = [&](const char* k, double v) { c.set(k, format_double(v)); };
  auto i = [&](const char* k, std::int64_t v) { c.set(k, std::to_string(v)); };
  i("gen.n", n);
  i("gen.communities", communities);
  i("gen.currencies", currencies);
  i("time.t0", t0);
  i("time.t1", t1);
  i("time.t2", t2);
  i("gen.ring_reach", ring_reach);
  d("gen.ring_prob", ring_prob);
  d("gen.ring_decay", ring_decay);
  d("gen.intra_rate", intra_rate);
  d("gen.inter_rate", inter_rate);
  d("gen.closure_rate", closure_rate);
  d("gen.beta", beta);
  d("gen.base_events", base_events);
  d("gen.intensity_gain", intensity_gain);
  d("gen.recency_gain", recency_gain);
  d("gen.jitter", jitter);
  d("gen.amount_mu", amount_mu);
  d("gen.amount_sigma", amount_sigma);
  d("gen.cont_bias", cont_bias);
  d("gen.cont_topo", cont_topo);
  d("gen.cont_tie", cont_tie);
  d("gen.new_bias", new_bias);
  d("gen.new_topo", new_topo);
  d("gen.new_tie", new_tie);
  d("gen.future_events", future_events);
  d("gen.purchase_rate", purchase_rate);
  d("gen.risk_amount", risk_amount);
  d("gen.risk_trend", risk_trend);
  d("gen.default_rate", default_rate);
  d("gen.credit_own", credit_own);
  d("gen.credit_neighbors", credit_neighbors);
  c.set("seed", std::to_string(seed));
}

GeneratedData generate(const GenConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed;
  const std::uint32_t n = cfg.n;
  auto community_begin = [&](std::uint64_t c) {
    return static_cast<NodeId>(c * n / cfg.communities);
  };
  auto community_of = [&](NodeId u) {
    // Largest c with community_begin(c) <= u.
    std::uint64_t c = (static_cast<std::uint64_t>(u) * cfg.communities) / n;
    while (c + 1 < cfg.communities && community_begin(c + 1) <= u) ++c;
    while (c > 0 && community_begin(c) > u) --c;
    return c;
  };

  // 1. Observed topology.
  std::vector<NodePair> edges;
  for (NodeId u = 0; u < n; ++u) {
    const auto c = community_of(u);
    const NodeId b = community_begin(c), e = community_begin(c + 1);
    const std::uint32_t size = e - b;
    for (std::uint32_t d = 1; d <= cfg.ring_reach && d < size; ++d) {
      Rng rng(seed, {kRing, u, d});
      if (rng.bernoulli(cfg.ring_prob * std::exp(-(static_cast<double>(d) - 1.0) / cfg.ring_decay))) {
        const NodeId v = b + (u - b + d) % size;
        edges.push_back(NodePair{u, v}.canonical());
      }
    }
    if (size > 1) {
      Rng rng(seed, {kIntra, u});
      const auto k = rng.poisson(cfg.intra_rate / 2.0);
      for (std::uint32_t j = 0; j < k; ++j) {
        const auto v = static_cast<NodeId>(b + rng.below(size));
        if (v != u) edges.push_back(NodePair{u, v}.canonical());
      }
    }
    if (size < n) {
      Rng rng(seed, {kInter, u});
      const auto k = rng.poisson(cfg.inter_rate / 2.0);
      for (std::uint32_t j = 0; j < k; ++j) {
        NodeId v = static_cast<NodeId>(rng.below(n - size));
        if (v >= b) v += size;
        edges.push_back(NodePair{u, v}.canonical());
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  if (cfg.closure_rate > 0.0) {
    // Triadic closure: each node introduces pairs of its own contacts, drawn
    // from the pre-closure adjacency so the result is order-independent.
    std::vector<std::vector<NodeId>> nbrs(n);
    for (const auto& [u, v] : edges) {
      nbrs[u].push_back(v);
      nbrs[v].push_back(u);
    }
    for (auto& row : nbrs) std::sort(row.begin(), row.end());
    for (NodeId u = 0; u < n; ++u) {
      if (nbrs[u].size() < 2) continue;
      Rng rng(seed, {kClosure, u});
      const auto k = rng.poisson(cfg.closure_rate);
      for (std::uint32_t j = 0; j < k; ++j) {
        const auto a = rng.below(nbrs[u].size());
        auto b = rng.below(nbrs[u].size() - 1);
        if (b >= a) ++b;
        edges.push_back(NodePair{nbrs[u][a], nbrs[u][b]}.canonical());
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  // Sorted adjacency with tie strengths, for common-neighbor statistics.
  std::vector<double> tie(edges.size());
  std::vector<std::vector<std::pair<NodeId, double>>> adj(n);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    Rng rng(seed, {kTie, u, v});
    tie[i] = rng.normal();
    adj[u].emplace_back(v, tie[i]);
    adj[v].emplace_back(u, tie[i]);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());

  GeneratedData out;
  out.header = cfg.header();
  const std::int64_t t0 = cfg.t0, t1 = cfg.t1, t2 = cfg.t2;

  auto emit_transfer = [&](Rng& rng, NodePair p, std::int64_t t, std::uint16_t primary) {
    const auto currency = rng.bernoulli(0.85) ? primary : static_cast<std::uint16_t>(rng.below(cfg.currencies));
    const auto amount = draw_amount(rng, cfg.amount_mu, cfg.amount_sigma);
    const bool forward = rng.bernoulli(0.5);
    out.transfers.push_back({forward ? p.u : p.v, forward ? p.v : p.u, t, amount, currency});
  };
  auto emit_future_series = [&](NodePair p) {
    Rng rng(seed, {kFutureSeries, p.u, p.v});
    const auto primary = static_cast<std::uint16_t>(rng.below(cfg.currencies));
    const auto count = 1 + rng.poisson(cfg.future_events);
    for (std::uint32_t k = 0; k < count; ++k) emit_transfer(rng, p, to_time(t1, t2, rng.uniform()), primary);
  };

  // 2. Observed series: the stronger the tie, the later the last transfer,
  // the more transfers and the more regular their spacing.
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const NodePair p = edges[i];
    Rng rng(seed, {kSeries, p.u, p.v});
    const double z = cfg.beta * tie[i];
    const double end = sigmoid(cfg.recency_gain * z + 1.0);
    const double start = end * rng.uniform(0.0, 0.5);
    const auto count = 1 + rng.poisson(cfg.base_events * std::exp(cfg.intensity_gain * z));
    const double gap = (end - start) / static_cast<double>(count);
    const double noise = cfg.jitter * (1.0 - sigmoid(z));
    const auto primary = static_cast<std::uint16_t>(rng.below(cfg.currencies));
    for (std::uint32_t k = 0; k < count; ++k) {
      // Regular grid ending exactly at `end`, jittered backwards for weak ties.
      const double frac = start + gap * (static_cast<double>(k) + 1.0 - noise * rng.uniform());
      emit_transfer(rng, p, to_time(t0, t1, frac), primary);
    }
  }

  // 3. Future links and the oracle.
  auto common = [&](NodeId u, NodeId v) {
    std::size_t cn = 0;
    const auto& a = adj[u];
    const auto& b = adj[v];
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
      if (a[i].first < b[j].first) {
        ++i;
      } else if (b[j].first < a[i].first) {
        ++j;
      } else {
        ++cn;
        ++i;
        ++j;
      }
    }
    return cn;
  };
  std::vector<double> cont_prob(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    const double cn = static_cast<double>(common(u, v));
    cont_prob[i] = sigmoid(cfg.cont_bias + cfg.cont_topo * std::log1p(cn) + cfg.cont_tie * cfg.beta * tie[i]);
    out.oracle.push_back({edges[i], cont_prob[i]});
  }
  {
    // Hop-2 non-edges: common-neighbor count and mean tie strength along the
    // two-step paths, accumulated in a dense scratch row per u.
    std::vector<std::uint32_t> cn(n, 0);
    std::vector<double> path_tie(n, 0.0);
    std::vector<NodeId> touched;
    std::vector<char> is_neighbor(n, 0);
    for (NodeId u = 0; u < n; ++u) {
      for (const auto& [z, t] : adj[u]) is_neighbor[z] = 1;
      for (const auto& [z, tuz] : adj[u]) {
        for (const auto& [w, tzw] : adj[z]) {
          if (w <= u || is_neighbor[w]) continue;
          if (cn[w] == 0) touched.push_back(w);
          ++cn[w];
          path_tie[w] += 0.5 * (tuz + tzw);
        }
      }
      std::sort(touched.begin(), touched.end());
      for (NodeId w : touched) {
        const double c = static_cast<double>(cn[w]);
        const double mean_tie = path_tie[w] / c;
        const double p = sigmoid(cfg.new_bias + cfg.new_topo * std::log1p(c) + cfg.new_tie * cfg.beta * mean_tie);
        out.oracle.push_back({NodePair{u, w}, p});
        cn[w] = 0;
        path_tie[w] = 0.0;
      }
      touched.clear();
      for (const auto& [z, t] : adj[u]) is_neighbor[z] = 0;
    }
  }
  std::sort(out.oracle.begin(), out.oracle.end(),
            [](const OracleEntry& a, const OracleEntry& b) { return a.pair < b.pair; });
  std::size_t future_links = 0;
  for (const auto& o : out.oracle) {
    Rng rng(seed, {kFuture, o.pair.u, o.pair.v});
    if (rng.bernoulli(o.bayes_prob)) {
      emit_future_series(o.pair);
      ++future_links;
    }
  }

  // 4. Purchases shaped by credit risk: riskier nodes spend differently and
  // their activity fades over the horizon.
  std::vector<double> risk(n);
  for (NodeId u = 0; u < n; ++u) {
    Rng r(seed, {kRisk, u});
    risk[u] = r.normal();
    Rng rng(seed, {kPurchases, u});
    const auto count = 1 + rng.poisson(cfg.purchase_rate);
    const double shape = std::exp(cfg.risk_trend * risk[u]);
    for (std::uint32_t k = 0; k < count; ++k) {
      const double frac = std::pow(rng.uniform(), shape);
      TransactionEvent ev;
      ev.timestamp = to_time(t0, t2, frac);
      ev.amount = draw_amount(rng, 6.0 + cfg.risk_amount * risk[u], 0.8);
      ev.currency = static_cast<std::uint16_t>(rng.below(cfg.currencies));
      out.purchases.push_back({u, ev});
    }
  }

  // 5. Credit labels: own risk plus the neighbors' risk weighted by how
  // likely each tie is to persist.
  out.credit_labels.resize(n);
  {
    std::vector<double> weight_sum(n, 0.0), weighted_risk(n, 0.0);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto [u, v] = edges[i];
      weight_sum[u] += cont_prob[i];
      weight_sum[v] += cont_prob[i];
      weighted_risk[u] += cont_prob[i] * risk[v];
      weighted_risk[v] += cont_prob[i] * risk[u];
    }
    const double base = std::log(cfg.default_rate / (1.0 - cfg.default_rate));
    for (NodeId u = 0; u < n; ++u) {
      const double nb = weight_sum[u] > 0.0 ? weighted_risk[u] / weight_sum[u] : 0.0;
      Rng rng(seed, {kCredit, u});
      out.credit_labels[u] = rng.bernoulli(sigmoid(base + cfg.credit_own * risk[u] + cfg.credit_neighbors * nb)) ? 1 : 0;
    }
  }
  log_info("generated ", n, " nodes, ", edges.size(), " observed edges, ", out.transfers.size(), " transfers, ",
           future_links, " future links, ", out.oracle.size(), " oracle pairs");
  return out;
}

void write_generated(const GeneratedData& data, const GenConfig& cfg, const std::filesystem::path& dir) {
  const auto graph = TemporalGraph::build(data.header, data.purchases, data.transfers);
  write_dataset(graph, dir);
  {
    auto out = open_output(dir / "oracle.csv");
    out << "u,v,bayes_prob\n";
    for (const auto& o : data.oracle) out << o.pair.u << ',' << o.pair.v << ',' << format_double(o.bayes_prob, 9) << '\n';
    if (!out) fail(ErrorCode::io_error, "failed writing oracle.csv");
  }
  {
    auto out = open_output(dir / "credit_labels.csv");
    out << "node_id,label\n";
    for (std::size_t u = 0; u < data.credit_labels.size(); ++u) out << u << ',' << data.credit_labels[u] << '\n';
    if (!out) fail(ErrorCode::io_error, "failed writing credit_labels.csv");
  }
  Config manifest;
  cfg.to_config(manifest);
  manifest.save(dir / "gen.cfg");
}

std::vector<OracleEntry> read_oracle(const std::filesystem::path& path) {
  CsvReader reader(path, "u,v,bayes_prob");
  std::vector<OracleEntry> out;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 3) reader.error("expected 3 fields");
    OracleEntry e;
    e.pair = NodePair{parse_field<NodeId>(reader, f[0], "u"), parse_field<NodeId>(reader, f[1], "v")}.canonical();
    e.bayes_prob = parse_field<double>(reader, f[2], "bayes_prob");
    if (!is_probability(e.bayes_prob)) reader.error("bayes_prob outside [0, 1]");
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const OracleEntry& a, const OracleEntry& b) { return a.pair < b.pair; });
  return out;
}

std::vector<int> read_credit_labels(const std::filesystem::path& path, std::size_t node_count) {
  CsvReader reader(path, "node_id,label");
  std::vector<int> labels(node_count, -1);
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 2) reader.error("expected 2 fields");
    const auto u = parse_field<std::size_t>(reader, f[0], "node_id");
    const auto l = parse_field<int>(reader, f[1], "label");
    if (u >= node_count) reader.error("node id out of range");
    if (l != 0 && l != 1) reader.error("label must be 0 or 1");
    labels[u] = l;
  }
  return labels;
}

std::vector<double> oracle_scores(const std::vector<OracleEntry>& oracle, const std::vector<NodePair>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto key = p.canonical();
    auto it = std::lower_bound(oracle.begin(), oracle.end(), key,
                               [](const OracleEntry& e, const NodePair& k) { return e.pair < k; });
    out.push_back(it != oracle.end() && it->pair == key ? it->bayes_prob : 0.0);
  }
  return out;
}

}  // namespace templink
