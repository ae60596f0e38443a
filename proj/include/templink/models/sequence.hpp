// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "templink/features.hpp"
#include "templink/graph_store.hpp"
#include "templink/models/config.hpp"
#include "templink/models/trainer.hpp"
#include "templink/nn/layers.hpp"
#include "templink/nn/optim.hpp"
#include "templink/splits.hpp"

namespace templink {

/// GRU over a binned series, then ReLU dense layers, then a scalar logit.
/// Serves both as the RNN link scorer (edge series) and as the pretrained
/// node encoder (purchase series), whose embedded transactions are the output
/// of the last hidden dense layer.
struct SequenceSpec {
  std::string kind;                   // "rnn_link" or "node_encoder"
  std::size_t in_dim = 0;             // 3 + currencies
  std::size_t hidden = 64;            // GRU width
  std::vector<std::size_t> dense{32}; // hidden dense widths
  std::size_t period_steps = 12;
  bool zero_head = false;             // head starts at zero (untrained output 0.5)
  std::uint64_t seed = 0;
};

class SequenceModel {
 public:
  explicit SequenceModel(SequenceSpec spec);

  const SequenceSpec& spec() const { return spec_; }
  nn::ParameterStore& params() { return *store_; }
  const nn::ParameterStore& params() const { return *store_; }
  std::size_t embedding_dim() const { return spec_.dense.back(); }

  /// Output of the last hidden dense layer, [batch, embedding_dim].
  nn::Var embed(nn::Tape& tape, const SequenceBatch& batch) const;
  /// Logits [batch, 1].
  nn::Var logits(nn::Tape& tape, const SequenceBatch& batch) const;

  std::vector<double> predict(const SequenceBatch& batch) const;
  nn::Tensor embeddings(const SequenceBatch& batch) const;

  /// Bin period that splits `window` into period_steps bins.
  std::int64_t period_for(TimeWindow window) const;

  nn::Checkpoint checkpoint() const;
  static SequenceModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  SequenceSpec spec_;
  std::unique_ptr<nn::ParameterStore> store_;
  nn::GruCell gru_;
  std::vector<nn::Dense> dense_;
  nn::Dense head_;
};

/// Rows [begin, end) of a sequence batch as a new batch.
SequenceBatch slice_batch(const SequenceBatch& batch, std::size_t begin, std::size_t end);
/// Rows listed in `index` as a new batch.
SequenceBatch gather_batch(const SequenceBatch& batch, std::span<const std::size_t> index);

// ---------------------------------------------------------------------------
// Link scoring

/// Probability of a future (or hidden) link for node pairs in a view.
class LinkScorer {
 public:
  virtual ~LinkScorer() = default;
  virtual std::vector<double> score(const GraphView& view, std::span<const NodePair> pairs) const = 0;
};

/// Returns the same value for every pair (constant 1 turns a weighted
/// variant into its binary-adjacency counterpart).
class ConstantScorer final : public LinkScorer {
 public:
  explicit ConstantScorer(double value) : value_(value) {}
  std::vector<double> score(const GraphView& view, std::span<const NodePair> pairs) const override;

 private:
  double value_;
};

/// GRU over the pair's transfer series inside the view's window.
class RnnLinkScorer final : public LinkScorer {
 public:
  explicit RnnLinkScorer(const SequenceModel& model) : model_(&model) {}
  std::vector<double> score(const GraphView& view, std::span<const NodePair> pairs) const override;

 private:
  const SequenceModel* model_;
};

SequenceSpec link_model_spec(const ModelConfig& cfg, std::size_t currencies);
SequenceSpec node_encoder_spec(const ModelConfig& cfg, std::size_t currencies);

struct TrainedSequenceModel {
  SequenceModel model;
  TrainResult result;
};

/// Trains the RNN link scorer on the split's train set, selecting on the
/// validation set. Each pair is represented by its transfer series in the
/// set's context window; pairs whose edge the protocol hides (edge-sampling
/// positives) and pairs without an edge get an empty series.
TrainedSequenceModel train_rnn_link(const TemporalGraph& graph, const Split& split, const ModelConfig& cfg,
                                    const TrainConfig& tcfg);

/// Series of each sample pair as the link scorer sees it.
SequenceBatch sample_series(const TemporalGraph& graph, const SampleSet& set, std::int64_t period);

/// Pretrains the node encoder on credit labels of train-segment nodes
/// (purchase series in `window`), selecting on validation-segment nodes.
/// At most `max_nodes` nodes per segment are used (0 = all).
TrainedSequenceModel pretrain_node_encoder(const TemporalGraph& graph, std::span<const int> credit_labels,
                                           TimeWindow window, const SplitConfig& split, const ModelConfig& cfg,
                                           const TrainConfig& tcfg, std::size_t max_nodes);

/// Embedded transactions for every node of `graph`: row u is the encoder's
/// last hidden layer applied to u's purchase series inside `window`.
struct NodeEmbeddings {
  std::size_t dim = 0;
  std::vector<double> values;  // node_count * dim
  std::span<const double> row(NodeId u) const { return {values.data() + static_cast<std::size_t>(u) * dim, dim}; }
};

NodeEmbeddings embed_nodes(const SequenceModel& encoder, const TemporalGraph& graph, TimeWindow window);
/// Rows for the listed nodes only.
nn::Tensor embed_nodes(const SequenceModel& encoder, const TemporalGraph& graph, TimeWindow window,
                       std::span<const NodeId> nodes);

/// Node ids of a split segment under the id-range plan, optionally capped by
/// seeded subsampling (result sorted).
std::vector<NodeId> segment_nodes(std::size_t node_count, Segment segment, const SplitConfig& split,
                                  std::size_t max_nodes, std::uint64_t seed);

}  // namespace templink
