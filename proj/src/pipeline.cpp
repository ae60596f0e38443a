// SPDX-License-Identifier: Apache-2.0
#include "templink/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "templink/error.hpp"
#include "templink/io.hpp"
#include "templink/log.hpp"
#include "templink/nn/optim.hpp"

namespace templink {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultConfig = R"(# templink default experiment configuration.
# Every key can be overridden by a later --config file or a CLI flag.

seed=7

# --- synthetic generator (frozen calibration) ---
gen.n=50000
gen.communities=100
gen.currencies=3
time.t0=1577836800
time.t1=1609372800
time.t2=1617256800
gen.ring_reach=5
gen.ring_prob=0.5
gen.ring_decay=2.0
gen.intra_rate=0.2
gen.inter_rate=0.1
gen.closure_rate=2.0
gen.beta=2.0
gen.base_events=1.5
gen.intensity_gain=0.35
gen.recency_gain=0.8
gen.jitter=0.3
gen.amount_mu=7.0
gen.amount_sigma=1.0
gen.cont_bias=-0.5
gen.cont_topo=1.0
gen.cont_tie=3.5
gen.new_bias=-6.5
gen.new_topo=2.5
gen.new_tie=2.0
gen.future_events=1.5
gen.purchase_rate=10.0
gen.risk_amount=0.4
gen.risk_trend=0.6
gen.default_rate=0.1
gen.credit_own=1.5
gen.credit_neighbors=2.0

# --- sampling ---
split.alpha=1.0
split.neg_hops=2
split.train_frac=0.6
split.val_frac=0.2
split.max_positives=2000

# --- features and models ---
feature.period_steps=12
model.conv_dims=32,32,32
model.rnn_hidden=64
model.dense_hidden=32
model.k=30
model.readout_channels=16
model.readout_span=1
model.l_max=20
model.hop=2
model.cap=256

# --- training ---
train.epochs=20
train.batch_size=32
train.lr=0.001
train.lr_decay=0.5
train.lr_patience=2
train.patience=6
link.epochs=15
pretrain.epochs=10
pretrain.batch_size=64
gcn.epochs=20
credit.max_nodes=4000

# --- what run_pipeline executes ---
pipeline.protocols=oot
pipeline.heuristics=CN,AA,RA,Jaccard,PA
pipeline.link_models=seal:sl,2seal:modified-sl,2seal-rnn:modified-sl,2seal-rnn:sl
pipeline.credit=true
)";

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create directory " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) fail(ErrorCode::io_error, "missing " + path.string() + " (" + hint + ")");
}

std::string protocol_name(Protocol p) { return std::string(to_string(p)); }

}  // namespace

Config default_config() { return Config::parse(kDefaultConfig, "<default>"); }

Workspace::Workspace(fs::path out, fs::path data)
    : root(std::move(out)), data_dir(data.empty() ? root / "data" : std::move(data)) {}

std::string method_name(Variant v) {
  switch (v) {
    case Variant::rnn_link: return "RNN";
    case Variant::seal: return "SEAL";
    case Variant::seal_rnn: return "SEAL-RNN";
    case Variant::two_seal: return "2-SEAL";
    case Variant::two_seal_rnn: return "2-SEAL-RNN";
    case Variant::wl_seal: return "WL-SEAL";
    case Variant::gcn_score: return "GCN";
    case Variant::gcn_score_lpatt: return "GCN+LPATT";
  }
  return "?";
}

std::string model_stem(Variant v, FeatureMode f, Protocol p) {
  if (v == Variant::rnn_link) return "rnn_" + protocol_name(p);
  if (v == Variant::gcn_score || v == Variant::gcn_score_lpatt) return std::string(to_string(v)) + "_credit";
  std::string feat(to_string(f));
  std::replace(feat.begin(), feat.end(), '+', '-');
  return std::string(to_string(v)) + "_" + feat + "_" + protocol_name(p);
}

Pipeline::Pipeline(Config cfg, Workspace ws) : cfg_(std::move(cfg)), ws_(std::move(ws)) {}

// --- configuration views ------------------------------------------------------

GenConfig Pipeline::gen_config() const {
  auto g = GenConfig::from_config(cfg_);
  g.validate();
  return g;
}

SplitConfig Pipeline::split_config(Protocol p) const {
  auto s = SplitConfig::from_config(cfg_);
  s.protocol = p;
  s.validate();
  return s;
}

ModelConfig Pipeline::model_config(Variant v, FeatureMode f) const {
  auto m = ModelConfig::from_config(cfg_);
  m.variant = v;
  m.features = f;
  m.validate();
  return m;
}

TrainConfig Pipeline::train_config(const std::string& prefix) const {
  auto t = TrainConfig::from_config(cfg_, prefix);
  t.validate();
  return t;
}

TimeWindow Pipeline::observed() const {
  const auto s = SplitConfig::from_config(cfg_);
  return s.observed();
}

// --- cached inputs ---------------------------------------------------------------

const TemporalGraph& Pipeline::graph() {
  if (!graph_) {
    require_file(ws_.data_dir / "transfers.csv", "run `generate` first");
    graph_ = std::make_unique<TemporalGraph>(load_dataset_dir(ws_.data_dir));
  }
  return *graph_;
}

const Split& Pipeline::split(Protocol p) {
  auto it = splits_.find(p);
  if (it != splits_.end()) return it->second;
  const auto dir = ws_.split_dir(p);
  require_file(dir / "samples.csv", "run `split --protocol " + protocol_name(p) + "` first");
  return splits_.emplace(p, read_split(dir)).first->second;
}

const std::vector<int>& Pipeline::credit_labels() {
  if (!credit_) {
    const auto path = ws_.data_dir / "credit_labels.csv";
    require_file(path, "run `generate` first");
    credit_ = read_credit_labels(path, graph().node_count());
  }
  return *credit_;
}

const SequenceModel& Pipeline::link_scorer(Protocol p) {
  auto it = scorers_.find(p);
  if (it != scorers_.end()) return *it->second;
  const auto path = ws_.models() / (model_stem(Variant::rnn_link, FeatureMode::sl, p) + ".ckpt");
  require_file(path, "run `train --variant rnn --protocol " + protocol_name(p) + "` first");
  auto model = std::make_unique<SequenceModel>(SequenceModel::from_checkpoint(nn::load_checkpoint(path)));
  return *scorers_.emplace(p, std::move(model)).first->second;
}

const SequenceModel& Pipeline::encoder() {
  if (!encoder_) {
    const auto path = ws_.models() / "node_encoder.ckpt";
    require_file(path, "run `pretrain` first");
    encoder_ = std::make_unique<SequenceModel>(SequenceModel::from_checkpoint(nn::load_checkpoint(path)));
  }
  return *encoder_;
}

const NodeEmbeddings& Pipeline::embeddings() {
  if (!embeddings_) embeddings_ = std::make_unique<NodeEmbeddings>(embed_nodes(encoder(), graph(), observed()));
  return *embeddings_;
}

std::vector<NodeId> Pipeline::credit_nodes(Segment s) {
  const auto split = SplitConfig::from_config(cfg_);
  const auto cap = static_cast<std::size_t>(cfg_.get_int("credit.max_nodes", 0));
  return segment_nodes(graph().node_count(), s, split, cap, split.seed);
}

// --- outputs -----------------------------------------------------------------------

void Pipeline::write_metrics(const ResultRow& row, const std::string& stem) const {
  ensure_dir(ws_.metrics());
  write_results_csv(ws_.metrics() / (stem + ".csv"), {row});
}

void Pipeline::write_scores(const std::string& stem, const std::vector<NodePair>& pairs, const std::vector<int>& labels,
                            const std::vector<double>& scores) const {
  ensure_dir(ws_.scores());
  const auto path = ws_.scores() / (stem + ".csv");
  auto out = open_output(path);
  out << "u,v,label,score\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out << pairs[i].u << ',' << pairs[i].v << ',' << labels[i] << ',' << format_double(scores[i], 9) << '\n';
  }
  if (!out) fail(ErrorCode::io_error, "failed writing " + path.string());
}

// --- steps -----------------------------------------------------------------------------

void Pipeline::generate() {
  const auto g = gen_config();
  const auto data = templink::generate(g);
  ensure_dir(ws_.data_dir);
  write_generated(data, g, ws_.data_dir);
  graph_.reset();
  credit_.reset();
  embeddings_.reset();
}

const Split& Pipeline::make_split(Protocol p) {
  auto s = templink::make_split(graph(), split_config(p));
  ensure_dir(ws_.split_dir(p));
  write_split(s, ws_.split_dir(p));
  splits_.insert_or_assign(p, std::move(s));
  return splits_.at(p);
}

ResultRow Pipeline::baseline(HeuristicKind kind, Protocol p) {
  const auto& set = split(p)[Segment::test];
  const GraphView view(graph(), set.window);
  std::vector<NodePair> pairs;
  std::vector<double> scores;
  for (const auto& s : set.samples) {
    pairs.push_back(s.pair);
    scores.push_back(heuristic_score(kind, view, s.pair.u, s.pair.v, set.hides(s)));
  }
  const auto labels = sample_labels(set);
  ResultRow row{std::string(to_string(kind)), protocol_name(p), "-", split(p).cfg.seed, roc_auc(scores, labels),
                labels.size()};
  const auto stem = std::string(to_string(kind)) + "_" + protocol_name(p);
  write_scores(stem, pairs, labels, scores);
  write_metrics(row, stem);
  return row;
}

void Pipeline::pretrain() {
  const auto cfg = model_config(Variant::gcn_score, FeatureMode::et);
  const auto split = SplitConfig::from_config(cfg_);
  auto trained = pretrain_node_encoder(graph(), credit_labels(), observed(), split, cfg, train_config("pretrain"),
                                       static_cast<std::size_t>(cfg_.get_int("credit.max_nodes", 0)));
  ensure_dir(ws_.models());
  ensure_dir(ws_.logs());
  nn::save_checkpoint(ws_.models() / "node_encoder.ckpt", trained.model.checkpoint());
  write_trace(ws_.logs() / "node_encoder.csv", trained.result.trace);
  encoder_ = std::make_unique<SequenceModel>(std::move(trained.model));
  embeddings_.reset();
}

TrainResult Pipeline::train(Variant v, FeatureMode f, Protocol p) {
  ensure_dir(ws_.models());
  ensure_dir(ws_.logs());
  const auto cfg = model_config(v, f);
  const auto stem = model_stem(v, f, p);
  TrainResult result;
  if (v == Variant::rnn_link) {
    auto trained = train_rnn_link(graph(), split(p), cfg, train_config("link"));
    nn::save_checkpoint(ws_.models() / (stem + ".ckpt"), trained.model.checkpoint());
    result = std::move(trained.result);
    scorers_.insert_or_assign(p, std::make_unique<SequenceModel>(std::move(trained.model)));
  } else if (cfg.is_gcn()) {
    const GraphView view(graph(), observed());
    std::optional<RnnLinkScorer> scorer;
    if (cfg.uses_link_weights()) scorer.emplace(link_scorer(Protocol::out_of_time));
    const LinkScorer* weights = scorer ? &*scorer : nullptr;
    const auto train_nodes = credit_nodes(Segment::train);
    const auto val_nodes = credit_nodes(Segment::val);
    const auto train = prepare_egos(view, train_nodes, cfg, weights);
    const auto val = prepare_egos(view, val_nodes, cfg, weights);
    std::vector<int> train_y, val_y;
    for (auto u : train_nodes) train_y.push_back(credit_labels()[u]);
    for (auto u : val_nodes) val_y.push_back(credit_labels()[u]);
    auto trained = train_gcn_credit(train, train_y, val, val_y, cfg, train_config("gcn"), embeddings());
    nn::save_checkpoint(ws_.models() / (stem + ".ckpt"), trained.model.checkpoint());
    result = std::move(trained.result);
  } else {
    std::optional<RnnLinkScorer> scorer;
    if (cfg.uses_link_weights()) scorer.emplace(link_scorer(p));
    const NodeEmbeddings* et = (f == FeatureMode::et || f == FeatureMode::et_sl) ? &embeddings() : nullptr;
    auto trained = train_link_model(graph(), split(p), cfg, train_config("train"), scorer ? &*scorer : nullptr, et);
    nn::save_checkpoint(ws_.models() / (stem + ".ckpt"), trained.model.checkpoint());
    result = std::move(trained.result);
  }
  write_trace(ws_.logs() / (stem + ".csv"), result.trace);
  return result;
}

ResultRow Pipeline::evaluate(Variant v, FeatureMode f, Protocol p) {
  const auto stem = model_stem(v, f, p);
  const auto path = ws_.models() / (stem + ".ckpt");
  require_file(path, "run `train` for this model first");
  const auto seed = static_cast<std::uint64_t>(cfg_.get_int("seed", 0));

  if (v == Variant::gcn_score || v == Variant::gcn_score_lpatt) {
    const auto model = GcnModel::from_checkpoint(nn::load_checkpoint(path));
    const GraphView view(graph(), observed());
    std::optional<RnnLinkScorer> scorer;
    if (model.config().uses_link_weights()) scorer.emplace(link_scorer(Protocol::out_of_time));
    const auto nodes = credit_nodes(Segment::test);
    const auto samples = prepare_egos(view, nodes, model.config(), scorer ? &*scorer : nullptr);
    const auto scores = model.predict(samples, embeddings());
    std::vector<int> labels;
    std::vector<NodePair> pairs;
    for (auto u : nodes) {
      labels.push_back(credit_labels()[u]);
      pairs.push_back({u, u});
    }
    ResultRow row{method_name(v), kCreditProtocol, "et", seed, roc_auc(scores, labels), labels.size()};
    write_scores(stem, pairs, labels, scores);
    write_metrics(row, stem);
    return row;
  }

  const auto& set = split(p)[Segment::test];
  const auto labels = sample_labels(set);
  std::vector<NodePair> pairs;
  for (const auto& s : set.samples) pairs.push_back(s.pair);
  std::vector<double> scores;
  std::string feature = "-";
  if (v == Variant::rnn_link) {
    const auto model = SequenceModel::from_checkpoint(nn::load_checkpoint(path));
    scores = model.predict(sample_series(graph(), set, model.period_for(set.window)));
  } else {
    const auto model = SealModel::from_checkpoint(nn::load_checkpoint(path));
    std::optional<RnnLinkScorer> scorer;
    if (model.config().uses_link_weights()) scorer.emplace(link_scorer(p));
    const auto samples = prepare_samples(graph(), set, model.config(), scorer ? &*scorer : nullptr);
    scores = model.predict(samples, model.uses_et() ? &embeddings() : nullptr);
    feature = std::string(to_string(f));
  }
  ResultRow row{method_name(v), protocol_name(p), feature, seed, roc_auc(scores, labels), labels.size()};
  write_scores(stem, pairs, labels, scores);
  write_metrics(row, stem);
  return row;
}

ResultRow Pipeline::evaluate_encoder() {
  const auto& model = encoder();
  const auto nodes = credit_nodes(Segment::test);
  const GraphView view(graph(), observed());
  const auto scores = model.predict(batch_nodes(view, nodes, model.period_for(observed())));
  std::vector<int> labels;
  std::vector<NodePair> pairs;
  for (auto u : nodes) {
    labels.push_back(credit_labels()[u]);
    pairs.push_back({u, u});
  }
  ResultRow row{"RNN", kCreditProtocol, "et", static_cast<std::uint64_t>(cfg_.get_int("seed", 0)),
                roc_auc(scores, labels), labels.size()};
  write_scores("node_encoder_credit", pairs, labels, scores);
  write_metrics(row, "node_encoder_credit");
  return row;
}

std::vector<ResultRow> Pipeline::oracle_rows() {
  std::vector<ResultRow> rows;
  const auto oracle_path = ws_.data_dir / "oracle.csv";
  if (!fs::exists(oracle_path)) return rows;
  if (!fs::exists(ws_.split_dir(Protocol::out_of_time) / "samples.csv")) return rows;
  const auto oracle = read_oracle(oracle_path);
  const auto& s = split(Protocol::out_of_time);
  const auto& set = s[Segment::test];
  std::vector<NodePair> pairs;
  for (const auto& smp : set.samples) pairs.push_back(smp.pair);
  const auto labels = sample_labels(set);
  rows.push_back({"oracle", "oot", "-", s.cfg.seed, roc_auc(oracle_scores(oracle, pairs), labels), labels.size()});
  return rows;
}

std::vector<ResultRow> Pipeline::report() { return templink::report(ws_.metrics(), ws_.root, oracle_rows()); }

std::vector<ResultRow> Pipeline::run_all() {
  generate();
  for (const auto& pname : split_list(cfg_.get_string("pipeline.protocols", "oot"))) {
    const Protocol p = parse_protocol(pname);
    make_split(p);
    for (const auto& h : split_list(cfg_.get_string("pipeline.heuristics", ""))) baseline(parse_heuristic(h), p);
    const auto models = split_list(cfg_.get_string("pipeline.link_models", ""));
    bool needs_encoder = false;
    std::vector<std::pair<Variant, FeatureMode>> plan;
    for (const auto& item : models) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) fail(ErrorCode::config_error, "pipeline.link_models entry '" + item + "' needs variant:features");
      const auto v = parse_variant(item.substr(0, colon));
      const auto f = parse_feature_mode(item.substr(colon + 1));
      needs_encoder = needs_encoder || f == FeatureMode::et || f == FeatureMode::et_sl;
      plan.emplace_back(v, f);
    }
    train(Variant::rnn_link, FeatureMode::sl, p);
    evaluate(Variant::rnn_link, FeatureMode::sl, p);
    if (needs_encoder && !encoder_) pretrain();
    for (const auto& [v, f] : plan) {
      train(v, f, p);
      evaluate(v, f, p);
    }
  }
  if (cfg_.get_bool("pipeline.credit", false)) {
    if (scorers_.count(Protocol::out_of_time) == 0) {
      if (!splits_.count(Protocol::out_of_time)) make_split(Protocol::out_of_time);
      train(Variant::rnn_link, FeatureMode::sl, Protocol::out_of_time);
    }
    pretrain();
    evaluate_encoder();
    for (auto v : {Variant::gcn_score, Variant::gcn_score_lpatt}) {
      train(v, FeatureMode::et, Protocol::out_of_time);
      evaluate(v, FeatureMode::et, Protocol::out_of_time);
    }
  }
  return report();
}

}  // namespace templink
