// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "templink/config.hpp"
#include "templink/evaluation.hpp"
#include "templink/graph_store.hpp"
#include "templink/heuristics.hpp"
#include "templink/models/config.hpp"
#include "templink/models/gcn.hpp"
#include "templink/models/seal.hpp"
#include "templink/models/sequence.hpp"
#include "templink/splits.hpp"
#include "templink/synthgen.hpp"

namespace templink {

/// File layout of one experiment:
///   data/        nodes.csv, transfers.csv, header.txt, oracle.csv, credit_labels.csv, gen.cfg
///   splits/<p>/  samples.csv, split.cfg
///   models/      *.ckpt
///   logs/        training traces (epoch,train_loss,val_auc,lr)
///   scores/      per-sample test scores
///   metrics/     one results row per evaluated method
///   results.csv, results.txt
struct Workspace {
  std::filesystem::path root;
  std::filesystem::path data_dir;  // defaults to root/data

  explicit Workspace(std::filesystem::path out, std::filesystem::path data = {});
  std::filesystem::path split_dir(Protocol p) const { return root / "splits" / std::string(to_string(p)); }
  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path scores() const { return root / "scores"; }
  std::filesystem::path metrics() const { return root / "metrics"; }
};

/// Human-facing method name of a variant ("2-SEAL-RNN", "GCN+LPATT", ...).
std::string method_name(Variant v);

/// File stem of a trained model: "<variant>_<features>_<protocol>"; the link
/// scorer is "rnn_<protocol>", the credit models "<variant>_credit".
std::string model_stem(Variant v, FeatureMode f, Protocol p);

/// Protocol label used for the credit-scoring rows of results.csv.
inline constexpr const char* kCreditProtocol = "credit";

/// The experiment steps behind the CLI subcommands. Every step reads its
/// inputs from the workspace and rewrites its outputs deterministically, so
/// reruns with the same config are byte-identical. Loaded inputs are cached
/// for the lifetime of the object.
class Pipeline {
 public:
  Pipeline(Config cfg, Workspace ws);

  const Config& config() const { return cfg_; }
  const Workspace& workspace() const { return ws_; }

  /// Synthetic dataset, Bayes oracle and credit labels.
  void generate();
  /// Sample files for one protocol.
  const Split& make_split(Protocol p);
  /// Heuristic test scores and metrics row.
  ResultRow baseline(HeuristicKind kind, Protocol p);
  /// Node encoder pretrained on credit labels.
  void pretrain();
  /// Trains one model: the RNN link scorer (rnn), a SEAL-family model or a
  /// credit GCN. *-rnn and gcn-lpatt variants need a trained link scorer for
  /// the protocol (out-of-time for the credit models); ET feature modes and
  /// GCNs need the pretrained encoder.
  TrainResult train(Variant v, FeatureMode f, Protocol p);
  /// Test-set scores and metrics row of a trained model. For the node
  /// encoder pass Variant::rnn_link with kCreditProtocol semantics via
  /// evaluate_encoder().
  ResultRow evaluate(Variant v, FeatureMode f, Protocol p);
  /// Credit-default Gini of the pretrained encoder's own head.
  ResultRow evaluate_encoder();
  /// Bayes-oracle rows for every protocol with a split on disk (oot only;
  /// the oracle describes future links).
  std::vector<ResultRow> oracle_rows();
  /// results.csv / results.txt from every metrics file plus oracle rows.
  std::vector<ResultRow> report();

  /// Everything listed by pipeline.* config keys, end to end.
  std::vector<ResultRow> run_all();

 private:
  const TemporalGraph& graph();
  const Split& split(Protocol p);
  const std::vector<int>& credit_labels();
  const SequenceModel& link_scorer(Protocol p);
  const SequenceModel& encoder();
  const NodeEmbeddings& embeddings();
  ModelConfig model_config(Variant v, FeatureMode f) const;
  TrainConfig train_config(const std::string& prefix) const;
  GenConfig gen_config() const;
  SplitConfig split_config(Protocol p) const;
  TimeWindow observed() const;
  std::vector<NodeId> credit_nodes(Segment s);
  void write_metrics(const ResultRow& row, const std::string& stem) const;
  void write_scores(const std::string& stem, const std::vector<NodePair>& pairs, const std::vector<int>& labels,
                    const std::vector<double>& scores) const;

  Config cfg_;
  Workspace ws_;
  std::unique_ptr<TemporalGraph> graph_;
  std::map<Protocol, Split> splits_;
  std::optional<std::vector<int>> credit_;
  std::map<Protocol, std::unique_ptr<SequenceModel>> scorers_;
  std::unique_ptr<SequenceModel> encoder_;
  std::unique_ptr<NodeEmbeddings> embeddings_;
};

/// Shipped defaults (the frozen generator calibration plus model and
/// training settings), identical to configs/default.cfg.
Config default_config();

}  // namespace templink
