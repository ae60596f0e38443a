// SPDX-License-Identifier: Apache-2.0
#include "templink/models/seal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "templink/error.hpp"
#include "templink/nn/ops.hpp"
#include "templink/parallel.hpp"
#include "templink/rng.hpp"

namespace templink {

namespace {

constexpr std::size_t kPredictChunk = 256;

std::uint64_t meta_u64(const nn::Checkpoint& ckpt, const std::string& key) {
  auto it = ckpt.meta.find(key);
  if (it == ckpt.meta.end()) fail(ErrorCode::parse_error, "checkpoint is missing metadata '" + key + "'");
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    fail(ErrorCode::parse_error, "checkpoint metadata '" + key + "' is not an integer");
  }
}

bool sortpool_readout(Variant v) { return v == Variant::seal || v == Variant::seal_rnn; }

}  // namespace

// --- edge weights -----------------------------------------------------------

EdgeWeightCache::EdgeWeightCache(const LinkScorer& scorer, const GraphView& view)
    : scorer_(&scorer), view_(&view), weights_(view.base().edge_count(), std::numeric_limits<double>::quiet_NaN()) {}

bool EdgeWeightCache::has(EdgeId e) const { return e < weights_.size() && !std::isnan(weights_[e]); }

void EdgeWeightCache::ensure(std::span<const EdgeId> edges) {
  std::vector<EdgeId> missing;
  for (auto e : edges) {
    require(e < weights_.size(), "edge id out of range");
    if (std::isnan(weights_[e])) missing.push_back(e);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (missing.empty()) return;
  std::vector<NodePair> pairs;
  pairs.reserve(missing.size());
  for (auto e : missing) pairs.push_back(view_->base().endpoints(e));
  const auto scores = scorer_->score(*view_, pairs);
  for (std::size_t i = 0; i < missing.size(); ++i) {
    if (!std::isfinite(scores[i])) fail(ErrorCode::numeric_error, "link scorer returned a non-finite weight");
    weights_[missing[i]] = scores[i];
  }
}

double EdgeWeightCache::weight(EdgeId e) const {
  if (!has(e)) fail(ErrorCode::invalid_argument, "edge " + std::to_string(e) + " has not been scored");
  return weights_[e];
}

void weight_subgraph(EnclosingSubgraph& sub, const EdgeWeightCache& cache) {
  sub.edge_weights.resize(sub.slot_edges.size());
  for (std::size_t s = 0; s < sub.slot_edges.size(); ++s) sub.edge_weights[s] = cache.weight(sub.slot_edges[s]);
}

EnclosingSubgraph weight_subgraph(EnclosingSubgraph sub, const LinkScorer& scorer, const GraphView& view) {
  EdgeWeightCache cache(scorer, view);
  cache.ensure(sub.slot_edges);
  weight_subgraph(sub, cache);
  return sub;
}

// --- sample preparation -----------------------------------------------------

GraphSample prepare_pair(const GraphView& view, NodePair pair, bool hide_xy, const ModelConfig& cfg) {
  GraphSample out;
  out.sub = extract_enclosing(view, pair.u, pair.v, cfg.hop, cfg.cap, hide_xy, cfg.seed);
  out.labels = drnl_labels(out.sub, cfg.hide_targets());
  if (cfg.variant == Variant::wl_seal) {
    const auto order = palette_wl_order(out.sub, cfg.sort_k, cfg.seed);
    std::vector<std::int32_t> labels;
    labels.reserve(order.size());
    for (auto i : order) labels.push_back(out.labels[i]);
    out.sub = induced(out.sub, order);
    out.labels = std::move(labels);
  }
  return out;
}

std::vector<GraphSample> prepare_samples(const TemporalGraph& graph, const SampleSet& set, const ModelConfig& cfg,
                                         const LinkScorer* scorer) {
  const GraphView view(graph, set.window);
  std::vector<GraphSample> out(set.samples.size());
  parallel_for(out.size(), [&](std::size_t i) {
    const auto& s = set.samples[i];
    out[i] = prepare_pair(view, s.pair, set.hides(s), cfg);
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

nn::GraphBatch make_graph_batch(std::span<const GraphSample* const> samples) {
  nn::GraphBatch batch;
  bool any_weighted = false;
  for (const auto* s : samples) any_weighted = any_weighted || s->sub.weighted();
  batch.weighted = any_weighted;
  for (const auto* s : samples) {
    const auto& sub = s->sub;
    const auto base = static_cast<std::uint32_t>(batch.adj.node_count());
    const auto slot_base = static_cast<std::uint32_t>(batch.adj.targets.size());
    for (std::size_t i = 0; i < sub.node_count(); ++i) batch.adj.offsets.push_back(slot_base + sub.adj.offsets[i + 1]);
    for (auto t : sub.adj.targets) batch.adj.targets.push_back(base + t);
    if (any_weighted) {
      if (sub.weighted()) {
        batch.weights.insert(batch.weights.end(), sub.edge_weights.begin(), sub.edge_weights.end());
      } else if (sub.adj.slot_count() != 0) {
        fail(ErrorCode::invalid_argument, "batch mixes weighted and unweighted subgraphs");
      }
    }
    batch.offsets.push_back(static_cast<std::uint32_t>(batch.adj.node_count()));
  }
  return batch;
}

nn::Tensor node_features(std::span<const GraphSample* const> samples, bool labels, std::size_t l_max,
                         const NodeEmbeddings* et) {
  std::size_t n = 0;
  for (const auto* s : samples) n += s->sub.node_count();
  const std::size_t label_cols = labels ? l_max + 1 : 0;
  const std::size_t et_cols = et != nullptr ? et->dim : 0;
  const std::size_t cols = label_cols + et_cols;
  if (cols == 0) fail(ErrorCode::invalid_argument, "node features need structural labels or embeddings");
  nn::Tensor x({n, cols});
  std::size_t row = 0;
  for (const auto* s : samples) {
    if (labels && s->labels.size() != s->sub.node_count()) {
      fail(ErrorCode::invalid_argument, "structural labels do not align with subgraph nodes");
    }
    for (std::size_t i = 0; i < s->sub.node_count(); ++i, ++row) {
      auto dst = x.row(row);
      if (labels) {
        const auto l = static_cast<std::size_t>(std::max<std::int32_t>(0, s->labels[i]));
        dst[std::min(l, l_max)] = 1.0;
      }
      if (et != nullptr) {
        const auto src = et->row(s->sub.nodes[i]);
        std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(label_cols));
      }
    }
  }
  return x;
}

// --- model ------------------------------------------------------------------

SealModel::SealModel(const ModelConfig& cfg, std::size_t et_dim)
    : cfg_(cfg), store_(std::make_unique<nn::ParameterStore>()) {
  cfg_.validate();
  if (cfg_.variant == Variant::rnn_link || cfg_.is_gcn()) {
    fail(ErrorCode::config_error, "variant " + std::string(to_string(cfg_.variant)) + " is not a SEAL-family model");
  }
  et_dim_ = uses_et() ? et_dim : 0;
  if (uses_et() && et_dim_ == 0) fail(ErrorCode::config_error, "feature mode needs embedded transactions");
  input_dim_ = (cfg_.uses_labels() ? cfg_.l_max + 1 : 0) + et_dim_;

  const auto seed = stream_key(cfg_.seed, {0x5ea1});
  const bool sortpool = sortpool_readout(cfg_.variant);
  const auto act = sortpool ? nn::Activation::tanh : nn::Activation::relu;
  std::size_t width = input_dim_;
  std::size_t total = 0;
  for (std::size_t l = 0; l < cfg_.conv_dims.size(); ++l) {
    convs_.push_back(nn::GraphConv::create(*store_, "conv" + std::to_string(l), width, cfg_.conv_dims[l], act, seed));
    width = cfg_.conv_dims[l];
    total += width;
  }
  std::size_t readout_width = 0;
  switch (cfg_.variant) {
    case Variant::seal:
    case Variant::seal_rnn:
      readout_ = nn::Conv1dReadout::create(*store_, "readout", total, cfg_.readout_span, cfg_.readout_channels,
                                           nn::Activation::relu, seed);
      readout_width = cfg_.readout_channels;
      break;
    case Variant::two_seal:
    case Variant::two_seal_rnn: readout_width = 2 * total; break;
    default: readout_width = cfg_.sort_k * total; break;
  }
  hidden_ = nn::Dense::create(*store_, "dense", readout_width, cfg_.dense_hidden, nn::Activation::relu, seed);
  head_ = nn::Dense::create(*store_, "head", cfg_.dense_hidden, 1, nn::Activation::identity, seed);
}

bool SealModel::uses_et() const { return cfg_.features == FeatureMode::et || cfg_.features == FeatureMode::et_sl; }

nn::Var SealModel::logits(nn::Tape& tape, std::span<const GraphSample* const> samples, const NodeEmbeddings* et) const {
  if (uses_et() && et == nullptr) fail(ErrorCode::invalid_argument, "feature mode needs embedded transactions");
  if (uses_et() && et->dim != et_dim_) fail(ErrorCode::invalid_argument, "embedding width does not match the model");
  return logits(tape, samples, node_features(samples, cfg_.uses_labels(), cfg_.l_max, uses_et() ? et : nullptr));
}

nn::Var SealModel::logits(nn::Tape& tape, std::span<const GraphSample* const> samples,
                          const nn::Tensor& features) const {
  require(!samples.empty(), "empty batch");
  if (features.rank() != 2 || features.cols() != input_dim_) {
    fail(ErrorCode::invalid_argument, "node features have " + std::to_string(features.cols()) +
                                          " columns, model expects " + std::to_string(input_dim_));
  }
  if (cfg_.uses_link_weights()) {
    for (const auto* s : samples) {
      if (s->sub.adj.slot_count() != 0 && !s->sub.weighted()) {
        fail(ErrorCode::invalid_argument, std::string(to_string(cfg_.variant)) + " needs link-scorer edge weights");
      }
    }
  }
  const nn::GraphBatch batch = make_graph_batch(samples);
  if (features.rows() != batch.node_count()) {
    fail(ErrorCode::invalid_argument, "node features do not align with the subgraph nodes");
  }
  // Binary variants ignore any weights a caller may have attached.
  const bool weighted = cfg_.uses_link_weights() && batch.weighted;
  nn::Var w{};
  if (weighted) w = tape.constant(nn::Tensor({batch.weights.size()}, batch.weights));

  nn::Var h = tape.constant(features);
  std::vector<nn::Var> layers;
  for (const auto& conv : convs_) {
    h = conv.forward(tape, h, batch.adj, weighted ? &w : nullptr);
    layers.push_back(h);
  }
  const nn::Var all = layers.size() == 1 ? layers.front() : nn::concat_cols(layers);

  nn::Var pooled{};
  switch (cfg_.variant) {
    case Variant::seal:
    case Variant::seal_rnn:
      pooled = readout_.forward(tape, nn::sort_pool(all, batch.offsets, cfg_.sort_k), cfg_.sort_k);
      break;
    case Variant::two_seal:
    case Variant::two_seal_rnn: pooled = nn::two_node_pool(all, batch.offsets); break;
    default: {
      std::vector<std::int64_t> index;
      index.reserve(samples.size() * cfg_.sort_k);
      for (std::size_t g = 0; g < batch.graph_count(); ++g) {
        const std::size_t begin = batch.offsets[g];
        const std::size_t count = batch.offsets[g + 1] - begin;
        for (std::size_t k = 0; k < cfg_.sort_k; ++k) {
          index.push_back(k < count ? static_cast<std::int64_t>(begin + k) : -1);
        }
      }
      const std::size_t d = all.value().cols();
      pooled = nn::reshape(nn::gather_rows(all, std::move(index)), {samples.size(), cfg_.sort_k * d});
      break;
    }
  }
  return head_.forward(tape, hidden_.forward(tape, pooled));
}

std::vector<double> SealModel::predict(std::span<const GraphSample> samples, const NodeEmbeddings* et) const {
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

nn::Checkpoint SealModel::checkpoint() const {
  Config c;
  cfg_.to_config(c);
  std::map<std::string, std::string> meta(c.entries().begin(), c.entries().end());
  meta["kind"] = "link_model";
  meta["et_dim"] = std::to_string(et_dim_);
  return nn::make_checkpoint(*store_, std::move(meta));
}

SealModel SealModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  auto kind = ckpt.meta.find("kind");
  if (kind == ckpt.meta.end() || kind->second != "link_model") {
    fail(ErrorCode::parse_error, "checkpoint does not hold a SEAL-family link model");
  }
  Config c;
  for (const auto& [k, v] : ckpt.meta) {
    if (k != "kind" && k != "et_dim") c.set(k, v);
  }
  SealModel model(ModelConfig::from_config(c), meta_u64(ckpt, "et_dim"));
  nn::restore(model.params(), ckpt);
  return model;
}

// --- training ---------------------------------------------------------------

std::vector<int> sample_labels(const SampleSet& set) {
  std::vector<int> out;
  out.reserve(set.samples.size());
  for (const auto& s : set.samples) out.push_back(s.label);
  return out;
}

TrainedSealModel train_link_model(std::span<const GraphSample> train, std::span<const int> train_labels,
                                  std::span<const GraphSample> val, std::span<const int> val_labels,
                                  const ModelConfig& cfg, const TrainConfig& tcfg, const NodeEmbeddings* et) {
  require(train.size() == train_labels.size() && val.size() == val_labels.size(), "labels do not match samples");
  SealModel model(cfg, et != nullptr ? et->dim : 0);
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

TrainedSealModel train_link_model(const TemporalGraph& graph, const Split& split, const ModelConfig& cfg,
                                  const TrainConfig& tcfg, const LinkScorer* scorer, const NodeEmbeddings* et) {
  if (cfg.uses_link_weights() && scorer == nullptr) {
    fail(ErrorCode::invalid_argument, std::string(to_string(cfg.variant)) + " needs a trained link scorer");
  }
  const LinkScorer* weights = cfg.uses_link_weights() ? scorer : nullptr;
  const auto train = prepare_samples(graph, split[Segment::train], cfg, weights);
  const auto val = prepare_samples(graph, split[Segment::val], cfg, weights);
  return train_link_model(train, sample_labels(split[Segment::train]), val, sample_labels(split[Segment::val]), cfg,
                          tcfg, et);
}

}  // namespace templink
