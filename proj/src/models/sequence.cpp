// SPDX-License-Identifier: Apache-2.0
#include "templink/models/sequence.hpp"

#include <algorithm>
#include <cstring>

#include "templink/error.hpp"
#include "templink/nn/ops.hpp"
#include "templink/parallel.hpp"
#include "templink/rng.hpp"

namespace templink {

namespace {

constexpr std::size_t kPredictChunk = 512;

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (auto x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

std::vector<std::size_t> split_sizes(const std::string& text) {
  Config c;
  c.set("v", text);
  return c.get_sizes("v", {});
}

const std::string& meta_at(const nn::Checkpoint& ckpt, const std::string& key) {
  auto it = ckpt.meta.find(key);
  if (it == ckpt.meta.end()) fail(ErrorCode::parse_error, "checkpoint is missing metadata '" + key + "'");
  return it->second;
}

std::uint64_t meta_u64(const nn::Checkpoint& ckpt, const std::string& key) {
  const auto& text = meta_at(ckpt, key);
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    fail(ErrorCode::parse_error, "checkpoint metadata '" + key + "' is not an integer: " + text);
  }
}

}  // namespace

SequenceModel::SequenceModel(SequenceSpec spec) : spec_(std::move(spec)), store_(std::make_unique<nn::ParameterStore>()) {
  if (spec_.in_dim == 0 || spec_.hidden == 0 || spec_.dense.empty()) {
    fail(ErrorCode::config_error, "sequence model needs positive input, GRU and dense widths");
  }
  gru_ = nn::GruCell::create(*store_, "gru", spec_.in_dim, spec_.hidden, spec_.seed);
  std::size_t width = spec_.hidden;
  for (std::size_t i = 0; i < spec_.dense.size(); ++i) {
    dense_.push_back(nn::Dense::create(*store_, "dense" + std::to_string(i), width, spec_.dense[i],
                                       nn::Activation::relu, spec_.seed));
    width = spec_.dense[i];
  }
  head_ = nn::Dense::create(*store_, "head", width, 1, nn::Activation::identity, spec_.seed,
                            spec_.zero_head ? nn::Init::zero : nn::Init::uniform_fan_in);
}

nn::Var SequenceModel::embed(nn::Tape& tape, const SequenceBatch& batch) const {
  if (batch.feat_dim() != spec_.in_dim) {
    fail(ErrorCode::invalid_argument, "sequence batch has " + std::to_string(batch.feat_dim()) +
                                          " features per step, model expects " + std::to_string(spec_.in_dim));
  }
  nn::Var h = gru_.run(tape, batch.data, batch.lengths);
  for (const auto& d : dense_) h = d.forward(tape, h);
  return h;
}

nn::Var SequenceModel::logits(nn::Tape& tape, const SequenceBatch& batch) const {
  return head_.forward(tape, embed(tape, batch));
}

std::vector<double> SequenceModel::predict(const SequenceBatch& batch) const {
  const std::size_t n = batch.batch();
  std::vector<double> out(n);
  const std::size_t chunks = (n + kPredictChunk - 1) / kPredictChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kPredictChunk;
    const std::size_t end = std::min(n, begin + kPredictChunk);
    nn::Tape tape;
    const auto& z = logits(tape, slice_batch(batch, begin, end)).value();
    for (std::size_t i = begin; i < end; ++i) out[i] = nn::sigmoid(z[i - begin]);
  });
  return out;
}

nn::Tensor SequenceModel::embeddings(const SequenceBatch& batch) const {
  const std::size_t n = batch.batch();
  const std::size_t d = embedding_dim();
  nn::Tensor out({n, d});
  const std::size_t chunks = (n + kPredictChunk - 1) / kPredictChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kPredictChunk;
    const std::size_t end = std::min(n, begin + kPredictChunk);
    nn::Tape tape;
    const auto& e = embed(tape, slice_batch(batch, begin, end)).value();
    std::copy(e.values().begin(), e.values().end(), out.data() + begin * d);
  });
  return out;
}

std::int64_t SequenceModel::period_for(TimeWindow window) const {
  return default_period(window, spec_.period_steps);
}

nn::Checkpoint SequenceModel::checkpoint() const {
  std::map<std::string, std::string> meta{
      {"kind", spec_.kind},
      {"in_dim", std::to_string(spec_.in_dim)},
      {"hidden", std::to_string(spec_.hidden)},
      {"dense", join_sizes(spec_.dense)},
      {"period_steps", std::to_string(spec_.period_steps)},
      {"zero_head", spec_.zero_head ? "1" : "0"},
      {"seed", std::to_string(spec_.seed)},
  };
  return nn::make_checkpoint(*store_, std::move(meta));
}

SequenceModel SequenceModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  SequenceSpec spec;
  spec.kind = meta_at(ckpt, "kind");
  spec.in_dim = meta_u64(ckpt, "in_dim");
  spec.hidden = meta_u64(ckpt, "hidden");
  spec.dense = split_sizes(meta_at(ckpt, "dense"));
  spec.period_steps = meta_u64(ckpt, "period_steps");
  spec.zero_head = meta_at(ckpt, "zero_head") == "1";
  spec.seed = meta_u64(ckpt, "seed");
  SequenceModel model(std::move(spec));
  nn::restore(model.params(), ckpt);
  return model;
}

SequenceBatch slice_batch(const SequenceBatch& batch, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= batch.batch(), "slice_batch: range out of bounds");
  const std::size_t row = batch.steps() * batch.feat_dim();
  SequenceBatch out;
  out.period = batch.period;
  out.data = nn::Tensor({end - begin, batch.steps(), batch.feat_dim()},
                        std::vector<double>(batch.data.data() + begin * row, batch.data.data() + end * row));
  out.lengths.assign(batch.lengths.begin() + static_cast<std::ptrdiff_t>(begin),
                     batch.lengths.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

SequenceBatch gather_batch(const SequenceBatch& batch, std::span<const std::size_t> index) {
  const std::size_t row = batch.steps() * batch.feat_dim();
  SequenceBatch out;
  out.period = batch.period;
  out.data = nn::Tensor({index.size(), batch.steps(), batch.feat_dim()});
  out.lengths.reserve(index.size());
  for (std::size_t k = 0; k < index.size(); ++k) {
    require(index[k] < batch.batch(), "gather_batch: index out of bounds");
    std::memcpy(out.data.data() + k * row, batch.data.data() + index[k] * row, row * sizeof(double));
    out.lengths.push_back(batch.lengths[index[k]]);
  }
  return out;
}

std::vector<double> ConstantScorer::score(const GraphView&, std::span<const NodePair> pairs) const {
  return std::vector<double>(pairs.size(), value_);
}

std::vector<double> RnnLinkScorer::score(const GraphView& view, std::span<const NodePair> pairs) const {
  if (pairs.empty()) return {};
  return model_->predict(batch_edges(view, pairs, model_->period_for(view.window())));
}

SequenceSpec link_model_spec(const ModelConfig& cfg, std::size_t currencies) {
  SequenceSpec spec;
  spec.kind = "rnn_link";
  spec.in_dim = feature_dim(currencies);
  spec.hidden = cfg.rnn_hidden;
  spec.dense = {cfg.dense_hidden};
  spec.period_steps = cfg.period_steps;
  spec.zero_head = true;
  spec.seed = stream_key(cfg.seed, {0x11c});
  return spec;
}

SequenceSpec node_encoder_spec(const ModelConfig& cfg, std::size_t currencies) {
  SequenceSpec spec;
  spec.kind = "node_encoder";
  spec.in_dim = feature_dim(currencies);
  spec.hidden = cfg.rnn_hidden;
  spec.dense = {cfg.dense_hidden, std::max<std::size_t>(1, cfg.dense_hidden / 2)};
  spec.period_steps = cfg.period_steps;
  spec.zero_head = false;
  spec.seed = stream_key(cfg.seed, {0xe4c});
  return spec;
}

SequenceBatch sample_series(const TemporalGraph& graph, const SampleSet& set, std::int64_t period) {
  const GraphView view(graph, set.window);
  std::vector<NodePair> pairs;
  pairs.reserve(set.samples.size());
  for (const auto& s : set.samples) pairs.push_back(s.pair);
  SequenceBatch batch = batch_edges(view, pairs, period);
  const std::size_t row = batch.steps() * batch.feat_dim();
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    if (set.hides(set.samples[i])) std::fill_n(batch.data.data() + i * row, row, 0.0);
  }
  return batch;
}

namespace {

std::vector<int> labels_of(const SampleSet& set) {
  std::vector<int> out;
  out.reserve(set.samples.size());
  for (const auto& s : set.samples) out.push_back(s.label);
  return out;
}

TrainedSequenceModel fit_sequence(SequenceSpec spec, const SequenceBatch& train, const std::vector<int>& train_y,
                                  const SequenceBatch& val, const std::vector<int>& val_y, const TrainConfig& tcfg) {
  SequenceModel model(std::move(spec));
  auto result = fit(
      model.params(), train_y,
      [&](nn::Tape& tape, std::span<const std::size_t> idx) { return model.logits(tape, gather_batch(train, idx)); },
      val_y, [&] { return model.predict(val); }, tcfg);
  return {std::move(model), std::move(result)};
}

}  // namespace

TrainedSequenceModel train_rnn_link(const TemporalGraph& graph, const Split& split, const ModelConfig& cfg,
                                    const TrainConfig& tcfg) {
  auto spec = link_model_spec(cfg, graph.currencies());
  const auto& train_set = split[Segment::train];
  const auto& val_set = split[Segment::val];
  if (train_set.samples.empty() || val_set.samples.empty()) {
    fail(ErrorCode::invalid_argument, "link scorer needs non-empty train and validation sets");
  }
  const auto period = default_period(train_set.window, spec.period_steps);
  const auto train = sample_series(graph, train_set, period);
  const auto val = sample_series(graph, val_set, period);
  return fit_sequence(std::move(spec), train, labels_of(train_set), val, labels_of(val_set), tcfg);
}

std::vector<NodeId> segment_nodes(std::size_t node_count, Segment segment, const SplitConfig& split,
                                  std::size_t max_nodes, std::uint64_t seed) {
  std::vector<NodeId> nodes;
  for (std::size_t u = 0; u < node_count; ++u) {
    if (segment_of(static_cast<NodeId>(u), node_count, split) == segment) nodes.push_back(static_cast<NodeId>(u));
  }
  if (max_nodes != 0 && nodes.size() > max_nodes) {
    Rng rng(seed, {0x5e9, static_cast<std::uint64_t>(segment)});
    nodes = sample_without_replacement(std::move(nodes), max_nodes, rng);
    std::sort(nodes.begin(), nodes.end());
  }
  return nodes;
}

TrainedSequenceModel pretrain_node_encoder(const TemporalGraph& graph, std::span<const int> credit_labels,
                                           TimeWindow window, const SplitConfig& split, const ModelConfig& cfg,
                                           const TrainConfig& tcfg, std::size_t max_nodes) {
  if (credit_labels.empty()) fail(ErrorCode::invalid_argument, "credit label set is empty");
  if (credit_labels.size() != graph.node_count()) {
    fail(ErrorCode::invalid_argument, "credit labels cover " + std::to_string(credit_labels.size()) +
                                          " nodes, graph has " + std::to_string(graph.node_count()));
  }
  auto spec = node_encoder_spec(cfg, graph.currencies());
  const GraphView view(graph, window);
  const auto period = default_period(window, spec.period_steps);
  auto collect = [&](Segment seg, SequenceBatch& batch, std::vector<int>& y) {
    const auto nodes = segment_nodes(graph.node_count(), seg, split, max_nodes, cfg.seed);
    if (nodes.empty()) fail(ErrorCode::invalid_argument, "no labelled nodes in the " + std::string(to_string(seg)) + " segment");
    batch = batch_nodes(view, nodes, period);
    y.clear();
    for (auto u : nodes) y.push_back(credit_labels[u]);
  };
  SequenceBatch train, val;
  std::vector<int> train_y, val_y;
  collect(Segment::train, train, train_y);
  collect(Segment::val, val, val_y);
  return fit_sequence(std::move(spec), train, train_y, val, val_y, tcfg);
}

nn::Tensor embed_nodes(const SequenceModel& encoder, const TemporalGraph& graph, TimeWindow window,
                       std::span<const NodeId> nodes) {
  const GraphView view(graph, window);
  return encoder.embeddings(batch_nodes(view, nodes, encoder.period_for(window)));
}

NodeEmbeddings embed_nodes(const SequenceModel& encoder, const TemporalGraph& graph, TimeWindow window) {
  std::vector<NodeId> nodes(graph.node_count());
  for (std::size_t u = 0; u < nodes.size(); ++u) nodes[u] = static_cast<NodeId>(u);
  auto table = embed_nodes(encoder, graph, window, nodes);
  NodeEmbeddings out;
  out.dim = encoder.embedding_dim();
  out.values.assign(table.values().begin(), table.values().end());
  return out;
}

}  // namespace templink
