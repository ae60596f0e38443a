// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "templink/graph_store.hpp"
#include "templink/models/config.hpp"
#include "templink/models/sequence.hpp"
#include "templink/models/trainer.hpp"
#include "templink/nn/layers.hpp"
#include "templink/nn/optim.hpp"
#include "templink/splits.hpp"
#include "templink/subgraph.hpp"

namespace templink {

/// Link-scorer probabilities per base-graph edge, filled on demand. Each
/// edge is scored from its own series, so a weight never depends on which
/// other edges were requested alongside it.
class EdgeWeightCache {
 public:
  EdgeWeightCache(const LinkScorer& scorer, const GraphView& view);
  /// Scores every listed edge not seen before (single caller at a time).
  void ensure(std::span<const EdgeId> edges);
  double weight(EdgeId e) const;
  bool has(EdgeId e) const;

 private:
  const LinkScorer* scorer_;
  const GraphView* view_;
  std::vector<double> weights_;  // NaN = not scored yet
};

/// Sets one weight per adjacency slot from the cache; both slots of an edge
/// get the same value. Edges are only the observed ones; the target edge is
/// present or absent according to the extraction's hiding rule.
void weight_subgraph(EnclosingSubgraph& sub, const EdgeWeightCache& cache);
EnclosingSubgraph weight_subgraph(EnclosingSubgraph sub, const LinkScorer& scorer, const GraphView& view);

/// One model input: a (possibly weighted, possibly WL-truncated) subgraph
/// with its structural labels.
struct GraphSample {
  EnclosingSubgraph sub;
  std::vector<std::int32_t> labels;
};

/// Extraction, labelling and (for wl-seal) Palette-WL truncation of one pair.
/// Labels are computed on the full subgraph before truncation.
GraphSample prepare_pair(const GraphView& view, NodePair pair, bool hide_xy, const ModelConfig& cfg);

/// Prepares every sample of a set in parallel, in the set's context window.
/// When `scorer` is given, every subgraph edge is weighted by it.
std::vector<GraphSample> prepare_samples(const TemporalGraph& graph, const SampleSet& set, const ModelConfig& cfg,
                                         const LinkScorer* scorer);

/// Block-diagonal batch of the listed samples' adjacency (weights included
/// when the samples carry them).
nn::GraphBatch make_graph_batch(std::span<const GraphSample* const> samples);

/// Node feature matrix [N, F] of a batch: one-hot structural labels
/// (l_max + 1 columns) when `labels` is set, followed by embedded
/// transactions when `et` is given.
nn::Tensor node_features(std::span<const GraphSample* const> samples, bool labels, std::size_t l_max,
                         const NodeEmbeddings* et);

/// SEAL-family link model. Graph convolutions (tanh for the sort-pooling
/// readout, ReLU otherwise) are stacked and their per-node outputs
/// concatenated, so the readout sees sum(conv_dims) channels per node.
///  - seal / seal-rnn: SortPooling(K) -> 1-D conv over node slots -> global
///    max -> dense -> logit.
///  - 2seal / 2seal-rnn: rows of the two targets -> dense -> logit.
///  - wl-seal: inputs already truncated to the Palette-WL top K; the K rows
///    (zero-padded) are flattened -> dense -> logit.
class SealModel {
 public:
  /// `et_dim` is the embedded-transaction width (ignored by SL-only modes).
  SealModel(const ModelConfig& cfg, std::size_t et_dim);

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterStore& params() { return *store_; }
  const nn::ParameterStore& params() const { return *store_; }
  std::size_t input_dim() const { return input_dim_; }
  bool uses_et() const;

  /// Logits [batch, 1]; `features` must be node_features(...) of the batch.
  nn::Var logits(nn::Tape& tape, std::span<const GraphSample* const> samples, const nn::Tensor& features) const;
  nn::Var logits(nn::Tape& tape, std::span<const GraphSample* const> samples, const NodeEmbeddings* et) const;

  std::vector<double> predict(std::span<const GraphSample> samples, const NodeEmbeddings* et) const;

  nn::Checkpoint checkpoint() const;
  static SealModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  ModelConfig cfg_;
  std::size_t et_dim_ = 0;
  std::size_t input_dim_ = 0;
  std::unique_ptr<nn::ParameterStore> store_;
  std::vector<nn::GraphConv> convs_;
  nn::Conv1dReadout readout_;
  nn::Dense hidden_;
  nn::Dense head_;
};

struct TrainedSealModel {
  SealModel model;
  TrainResult result;
};

/// Trains a SEAL-family model on prepared train/validation samples.
TrainedSealModel train_link_model(std::span<const GraphSample> train, std::span<const int> train_labels,
                                  std::span<const GraphSample> val, std::span<const int> val_labels,
                                  const ModelConfig& cfg, const TrainConfig& tcfg, const NodeEmbeddings* et);

/// Convenience: prepares the split's train and validation sets (weighting
/// them with `scorer` for the *-rnn variants) and trains.
TrainedSealModel train_link_model(const TemporalGraph& graph, const Split& split, const ModelConfig& cfg,
                                  const TrainConfig& tcfg, const LinkScorer* scorer, const NodeEmbeddings* et);

std::vector<int> sample_labels(const SampleSet& set);

}  // namespace templink
