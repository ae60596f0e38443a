// SPDX-License-Identifier: Apache-2.0
#include "templink/models/gcn.hpp"

#include <algorithm>

#include "templink/error.hpp"
#include "templink/nn/ops.hpp"
#include "templink/parallel.hpp"
#include "templink/rng.hpp"

namespace templink {

namespace {

constexpr int kEgoHop = 2;
constexpr std::size_t kPredictChunk = 256;

}  // namespace

std::vector<GraphSample> prepare_egos(const GraphView& view, std::span<const NodeId> nodes, const ModelConfig& cfg,
                                      const LinkScorer* scorer) {
  std::vector<GraphSample> out(nodes.size());
  parallel_for(out.size(), [&](std::size_t i) {
    out[i].sub = extract_ego(view, nodes[i], kEgoHop, cfg.cap, cfg.seed);
  });
  if (scorer != nullptr) {
    EdgeWeightCache cache(*scorer, view);
    std::vector<EdgeId> edges;
    for (const auto& g : out) edges.insert(edges.end(), g.sub.slot_edges.begin(), g.sub.slot_edges.end());
    cache.ensure(edges);
    for (auto& g : out) weight_subgraph(g.sub, cache);
  }
  return out;
}

GcnModel::GcnModel(const ModelConfig& cfg, std::size_t et_dim)
    : cfg_(cfg), et_dim_(et_dim), store_(std::make_unique<nn::ParameterStore>()) {
  cfg_.validate();
  if (!cfg_.is_gcn()) fail(ErrorCode::config_error, "variant " + std::string(to_string(cfg_.variant)) + " is not a GCN");
  if (et_dim_ == 0) fail(ErrorCode::config_error, "the credit GCN needs embedded transactions");
  if (cfg_.conv_dims.size() < 2) fail(ErrorCode::config_error, "the credit GCN needs two model.conv_dims entries");
  const auto seed = stream_key(cfg_.seed, {0x6c9});
  const auto d1 = cfg_.conv_dims[0];
  const auto d2 = cfg_.conv_dims[1];
  conv1_ = nn::GraphConv::create(*store_, "conv0", et_dim_, d1, nn::Activation::relu, seed);
  conv2_ = nn::GraphConv::create(*store_, "conv1", d1, d2, nn::Activation::relu, seed);
  hidden_ = nn::Dense::create(*store_, "dense", et_dim_ + d1 + d2, cfg_.dense_hidden, nn::Activation::relu, seed);
  head_ = nn::Dense::create(*store_, "head", cfg_.dense_hidden, 1, nn::Activation::identity, seed);
}

nn::Var GcnModel::logits(nn::Tape& tape, std::span<const GraphSample* const> samples, const NodeEmbeddings& et) const {
  require(!samples.empty(), "empty batch");
  if (et.dim != et_dim_) fail(ErrorCode::invalid_argument, "embedding width does not match the model");
  const bool attention = cfg_.variant == Variant::gcn_score_lpatt;
  if (attention) {
    for (const auto* s : samples) {
      if (s->sub.adj.slot_count() != 0 && !s->sub.weighted()) {
        fail(ErrorCode::invalid_argument, "gcn-lpatt needs link-scorer edge weights");
      }
    }
  }
  const nn::GraphBatch batch = make_graph_batch(samples);
  const bool weighted = attention && batch.weighted;
  nn::Var w{};
  if (weighted) w = tape.constant(nn::Tensor({batch.weights.size()}, batch.weights));

  const nn::Var x = tape.constant(node_features(samples, false, 0, &et));
  const nn::Var h1 = conv1_.forward(tape, x, batch.adj, weighted ? &w : nullptr);
  const nn::Var h2 = conv2_.forward(tape, h1, batch.adj, weighted ? &w : nullptr);

  std::vector<std::int64_t> roots;
  roots.reserve(batch.graph_count());
  for (std::size_t g = 0; g < batch.graph_count(); ++g) roots.push_back(batch.offsets[g]);
  const nn::Var z = nn::concat_cols({nn::gather_rows(x, roots), nn::gather_rows(h1, roots), nn::gather_rows(h2, roots)});
  return head_.forward(tape, hidden_.forward(tape, z));
}

std::vector<double> GcnModel::predict(std::span<const GraphSample> samples, const NodeEmbeddings& et) const {
  std::vector<double> out(samples.size());
  const std::size_t chunks = (samples.size() + kPredictChunk - 1) / kPredictChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kPredictChunk;
    const std::size_t end = std::min(samples.size(), begin + kPredictChunk);
    std::vector<const GraphSample*> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back(&samples[i]);
    nn::Tape tape;
    const auto& z = logits(tape, batch, et).value();
    for (std::size_t i = begin; i < end; ++i) out[i] = nn::sigmoid(z[i - begin]);
  });
  return out;
}

nn::Checkpoint GcnModel::checkpoint() const {
  Config c;
  cfg_.to_config(c);
  std::map<std::string, std::string> meta(c.entries().begin(), c.entries().end());
  meta["kind"] = "gcn_credit";
  meta["et_dim"] = std::to_string(et_dim_);
  return nn::make_checkpoint(*store_, std::move(meta));
}

GcnModel GcnModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  auto kind = ckpt.meta.find("kind");
  if (kind == ckpt.meta.end() || kind->second != "gcn_credit") {
    fail(ErrorCode::parse_error, "checkpoint does not hold a credit GCN");
  }
  Config c;
  for (const auto& [k, v] : ckpt.meta) {
    if (k != "kind" && k != "et_dim") c.set(k, v);
  }
  GcnModel model(ModelConfig::from_config(c), std::stoull(ckpt.meta.at("et_dim")));
  nn::restore(model.params(), ckpt);
  return model;
}

TrainedGcnModel train_gcn_credit(std::span<const GraphSample> train, std::span<const int> train_labels,
                                 std::span<const GraphSample> val, std::span<const int> val_labels,
                                 const ModelConfig& cfg, const TrainConfig& tcfg, const NodeEmbeddings& et) {
  require(train.size() == train_labels.size() && val.size() == val_labels.size(), "labels do not match samples");
  GcnModel model(cfg, et.dim);
  std::vector<const GraphSample*> batch;
  auto result = fit(
      model.params(), train_labels,
      [&](nn::Tape& tape, std::span<const std::size_t> idx) {
        batch.clear();
        for (auto i : idx) batch.push_back(&train[i]);
        return model.logits(tape, batch, et);
      },
      val_labels, [&] { return model.predict(val, et); }, tcfg);
  return {std::move(model), std::move(result)};
}

}  // namespace templink
