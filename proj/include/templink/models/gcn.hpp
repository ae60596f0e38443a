// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "templink/models/seal.hpp"

namespace templink {

/// Hop-2 ego subgraphs (root = local node 0) of `nodes` in `view`, weighted
/// by `scorer` when given.
std::vector<GraphSample> prepare_egos(const GraphView& view, std::span<const NodeId> nodes, const ModelConfig& cfg,
                                      const LinkScorer* scorer);

/// Credit scorer: two ReLU graph convolutions over the ego subgraph with
/// embedded transactions as node features; the head reads the root's input
/// row and both convolution outputs, [X_0 | H1_0 | H2_0] -> dense -> logit.
/// With LP attention (gcn-lpatt) every edge is weighted by the link
/// scorer's probability for that pair.
class GcnModel {
 public:
  GcnModel(const ModelConfig& cfg, std::size_t et_dim);

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterStore& params() { return *store_; }
  const nn::ParameterStore& params() const { return *store_; }

  nn::Var logits(nn::Tape& tape, std::span<const GraphSample* const> samples, const NodeEmbeddings& et) const;
  std::vector<double> predict(std::span<const GraphSample> samples, const NodeEmbeddings& et) const;

  nn::Checkpoint checkpoint() const;
  static GcnModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  ModelConfig cfg_;
  std::size_t et_dim_ = 0;
  std::unique_ptr<nn::ParameterStore> store_;
  nn::GraphConv conv1_;
  nn::GraphConv conv2_;
  nn::Dense hidden_;
  nn::Dense head_;
};

struct TrainedGcnModel {
  GcnModel model;
  TrainResult result;
};

TrainedGcnModel train_gcn_credit(std::span<const GraphSample> train, std::span<const int> train_labels,
                                 std::span<const GraphSample> val, std::span<const int> val_labels,
                                 const ModelConfig& cfg, const TrainConfig& tcfg, const NodeEmbeddings& et);

}  // namespace templink
