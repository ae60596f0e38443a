// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "templink/config.hpp"
#include "templink/graph_store.hpp"

namespace templink {

/// Synthetic transaction-graph generator. Nodes are grouped into equal-size
/// communities with consecutive ids; inside a community nodes sit on a ring
/// and link to ring neighbors with a probability decaying in ring distance,
/// plus a sprinkling of random intra- and inter-community edges and a round
/// of triadic closure.
///
/// Each observed edge carries a latent tie strength eta ~ N(0, 1). Its
/// transfer series in [t0, t1) ends later, is denser and more regular the
/// larger beta * eta. The chance that an observed edge stays active in
/// [t1, t2) and the chance that a hop-2 non-edge appears there are logistic
/// in topology (common neighbors) and, scaled by beta, in tie strength.
/// Those probabilities are the Bayes oracle.
///
/// Each node has a latent credit risk r that shapes its purchase series
/// (amount level and a declining activity trend); default labels are
/// logistic in the node's own risk and in the tie-strength-weighted mean risk
/// of its neighbors.
struct GenConfig {
  std::uint32_t n = 50000;
  std::uint32_t communities = 100;
  std::uint16_t currencies = 3;
  std::int64_t t0 = 1577836800;
  std::int64_t t1 = 1577836800 + 31536000;
  std::int64_t t2 = 1577836800 + 31536000 + 7884000;

  // topology
  std::uint32_t ring_reach = 5;
  double ring_prob = 0.5;   // link probability at ring distance 1
  double ring_decay = 2.0;   // e-folding distance of the ring link probability
  double intra_rate = 0.2;   // extra random intra-community edges per node
  double inter_rate = 0.1;   // random inter-community edges per node
  double closure_rate = 2.0; // triadic-closure edges introduced per node

  // observed transfer series
  double beta = 2.0;             // signal strength
  double base_events = 1.5;      // mean extra events per observed edge at eta = 0
  double intensity_gain = 0.35;  // log-rate slope in beta * eta
  double recency_gain = 0.8;     // logit slope of the series end point in beta * eta
  double jitter = 0.3;           // spacing noise for the weakest ties (fraction of the gap)
  double amount_mu = 7.0;
  double amount_sigma = 1.0;

  // future links
  double cont_bias = -0.5;
  double cont_topo = 1.0;
  double cont_tie = 3.5;
  double new_bias = -6.5;
  double new_topo = 2.5;
  double new_tie = 2.0;
  double future_events = 1.5;

  // purchases and credit labels
  double purchase_rate = 10.0;
  double risk_amount = 0.4;
  double risk_trend = 0.6;
  double default_rate = 0.1;
  double credit_own = 1.5;
  double credit_neighbors = 2.0;

  std::uint64_t seed = 7;

  void validate() const;
  static GenConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
  DatasetHeader header() const { return {n, currencies, t0, t2 - 1}; }
};

struct OracleEntry {
  NodePair pair;  // u < v
  double bayes_prob = 0.0;
};

struct GeneratedData {
  DatasetHeader header;
  std::vector<PurchaseRow> purchases;
  std::vector<TransferRow> transfers;
  std::vector<OracleEntry> oracle;  // every observed edge and hop-2 pair, sorted
  std::vector<int> credit_labels;   // per node
};

GeneratedData generate(const GenConfig& cfg);

/// Writes nodes.csv, transfers.csv, header.txt, oracle.csv,
/// credit_labels.csv and the gen.cfg manifest into `dir`.
void write_generated(const GeneratedData& data, const GenConfig& cfg, const std::filesystem::path& dir);

std::vector<OracleEntry> read_oracle(const std::filesystem::path& path);
std::vector<int> read_credit_labels(const std::filesystem::path& path, std::size_t node_count);

/// Oracle probability per pair (0 for pairs not listed), in input order.
std::vector<double> oracle_scores(const std::vector<OracleEntry>& oracle, const std::vector<NodePair>& pairs);

}  // namespace templink
