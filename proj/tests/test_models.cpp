// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <filesystem>

#include "support/model_checks.hpp"
#include "support/oracles.hpp"
#include "templink/config.hpp"
#include "templink/error.hpp"
#include "templink/evaluation.hpp"
#include "templink/features.hpp"
#include "templink/io.hpp"
#include "templink/models/gcn.hpp"
#include "templink/models/seal.hpp"
#include "templink/models/sequence.hpp"
#include "templink/models/trainer.hpp"
#include "templink/nn/layers.hpp"
#include "templink/nn/ops.hpp"
#include "templink/rng.hpp"

namespace fs = std::filesystem;
using namespace templink;
using templink::check::toy_data;
using templink::check::toy_model_config;
using templink::check::ToyData;

namespace {

const ToyData& shared_data() {
  static const ToyData data = toy_data(3);
  return data;
}

}  // namespace

TEST(ModelConfig, ParsesNamesAndRoundTrips) {
  EXPECT_EQ(parse_variant("2seal-rnn"), Variant::two_seal_rnn);
  EXPECT_EQ(parse_variant("gcn-lpatt"), Variant::gcn_score_lpatt);
  EXPECT_EQ(parse_feature_mode("et+sl"), FeatureMode::et_sl);
  EXPECT_EQ(parse_feature_mode("msl"), FeatureMode::modified_sl);
  EXPECT_THROW(parse_variant("seal++"), Error);

  ModelConfig cfg = toy_model_config(Variant::wl_seal, FeatureMode::sl, 5);
  cfg.conv_dims = {8, 4};
  Config c;
  cfg.to_config(c);
  const auto back = ModelConfig::from_config(c);
  EXPECT_EQ(back.variant, cfg.variant);
  EXPECT_EQ(back.features, cfg.features);
  EXPECT_EQ(back.conv_dims, cfg.conv_dims);
  EXPECT_EQ(back.hop, 2);

  cfg.hop = 3;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(ModelConfig, OriginalLabelsHideTargetsModifiedDoNot) {
  EXPECT_TRUE(toy_model_config(Variant::seal, FeatureMode::sl, 0).hide_targets());
  EXPECT_FALSE(toy_model_config(Variant::seal, FeatureMode::modified_sl, 0).hide_targets());
  EXPECT_TRUE(toy_model_config(Variant::seal_rnn, FeatureMode::sl, 0).uses_link_weights());
  EXPECT_FALSE(toy_model_config(Variant::two_seal, FeatureMode::sl, 0).uses_link_weights());
}

TEST(SequenceModel, ZeroHeadPredictsOneHalfAndCheckpointsExactly) {
  SequenceSpec spec;
  spec.kind = "rnn_link";
  spec.in_dim = 6;
  spec.hidden = 5;
  spec.dense = {4};
  spec.zero_head = true;
  spec.seed = 3;
  SequenceModel model(spec);
  SequenceBatch batch;
  batch.data = check::random_tensor({7, 4, 6}, 2, 0.0, 2.0);
  batch.lengths.assign(7, 4);
  for (double p : model.predict(batch)) EXPECT_EQ(p, 0.5);

  for (auto* p : model.params().all()) p->value = check::random_tensor(p->value.shape(), 9);
  const auto before = model.predict(batch);
  const auto dir = fs::temp_directory_path() / "templink_test_seq";
  fs::create_directories(dir);
  nn::save_checkpoint(dir / "m.ckpt", model.checkpoint());
  const auto back = SequenceModel::from_checkpoint(nn::load_checkpoint(dir / "m.ckpt"));
  EXPECT_EQ(back.predict(batch), before);
  EXPECT_EQ(back.spec().dense, spec.dense);
  EXPECT_EQ(model.embeddings(batch).shape(), (nn::Shape{7, 4}));
}

TEST(SequenceModel, PredictionsDoNotDependOnBatchComposition) {
  SequenceSpec spec;
  spec.kind = "rnn_link";
  spec.in_dim = 4;
  spec.hidden = 6;
  spec.seed = 1;
  SequenceModel model(spec);
  SequenceBatch batch;
  batch.data = check::random_tensor({9, 3, 4}, 4);
  batch.lengths.assign(9, 3);
  const auto all = model.predict(batch);
  const auto part = model.predict(slice_batch(batch, 3, 6));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(part[i], all[3 + i]);
}

TEST(Scorers, ConstantAndRnnScorers) {
  const auto& data = shared_data();
  const GraphView view(data.graph, data.split[Segment::test].window);
  std::vector<NodePair> pairs;
  for (const auto& s : data.split[Segment::test].samples) pairs.push_back(s.pair);
  pairs.resize(20);
  for (double w : ConstantScorer(1.0).score(view, pairs)) EXPECT_EQ(w, 1.0);

  ModelConfig cfg = toy_model_config(Variant::rnn_link, FeatureMode::et, 2);
  SequenceModel untrained(link_model_spec(cfg, data.graph.currencies()));
  for (double p : RnnLinkScorer(untrained).score(view, pairs)) EXPECT_EQ(p, 0.5);
}

TEST(SealModel, UntrainedHeadsAndCheckpointRoundTrip) {
  const auto& data = shared_data();
  SampleSet set = data.split[Segment::test];
  set.samples.resize(30);
  for (auto v : {Variant::seal, Variant::two_seal, Variant::wl_seal}) {
    const auto cfg = toy_model_config(v, FeatureMode::sl, 4);
    const auto samples = prepare_samples(data.graph, set, cfg, nullptr);
    SealModel model(cfg, 0);
    const auto p = model.predict(samples, nullptr);
    for (double x : p) {
      EXPECT_GT(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
    const auto dir = fs::temp_directory_path() / "templink_test_seal";
    fs::create_directories(dir);
    nn::save_checkpoint(dir / "m.ckpt", model.checkpoint());
    const auto back = SealModel::from_checkpoint(nn::load_checkpoint(dir / "m.ckpt"));
    EXPECT_EQ(back.predict(samples, nullptr), p) << to_string(v);
    EXPECT_EQ(back.config().sort_k, cfg.sort_k);

    // Batching does not change a sample's output.
    const std::vector<GraphSample> one{samples[7]};
    EXPECT_EQ(model.predict(one, nullptr)[0], p[7]) << to_string(v);
  }
}

TEST(SealModel, WeightedVariantsRequireWeights) {
  const auto& data = shared_data();
  SampleSet set = data.split[Segment::test];
  set.samples.resize(5);
  const auto cfg = toy_model_config(Variant::two_seal_rnn, FeatureMode::modified_sl, 1);
  const auto samples = prepare_samples(data.graph, set, cfg, nullptr);
  SealModel model(cfg, 0);
  EXPECT_THROW(model.predict(samples, nullptr), Error);
  EXPECT_THROW(SealModel(toy_model_config(Variant::seal, FeatureMode::et, 1), 0), Error);
}

TEST(SealModel, PermutationInvariance) {
  for (auto v : {Variant::two_seal, Variant::seal, Variant::two_seal_rnn}) {
    const auto r = check::permutation_invariance(shared_data(), v, 5, 10, 11);
    EXPECT_EQ(r.graphs, 5u);
    EXPECT_EQ(r.identical, r.graphs * r.permutations) << to_string(v) << " max diff " << r.max_abs_diff;
  }
}

TEST(SealModel, ConstantScorerReducesToBinaryCounterpart) {
  for (auto v : {Variant::seal_rnn, Variant::two_seal_rnn, Variant::gcn_score_lpatt}) {
    EXPECT_LE(check::constant_scorer_gap(shared_data(), v, 40, 5), 1e-12) << to_string(v);
  }
}

TEST(PreparePair, LabelsMatchBruteForceForBothLabelSchemes) {
  const auto& data = shared_data();
  const auto& test = data.split[Segment::test];
  const GraphView view(data.graph, test.window);
  const auto cfg = toy_model_config(Variant::two_seal, FeatureMode::modified_sl, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto g = prepare_pair(view, test.samples[i].pair, false, cfg);
    EXPECT_EQ(g.labels, check::brute_drnl(g.sub, false));
    auto original = cfg;
    original.features = FeatureMode::sl;
    const auto h = prepare_pair(view, test.samples[i].pair, false, original);
    EXPECT_EQ(h.labels, check::brute_drnl(h.sub, true));
  }
}

TEST(Trainer, LearnsASeparableProblemAndRestoresBest) {
  // Two Gaussian blobs, linearly separable with a margin.
  const std::size_t n = 400;
  nn::Tensor x({n, 2});
  std::vector<int> y(n);
  Rng rng(4, {});
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    const double c = y[i] ? 1.5 : -1.5;
    x.at(i, 0) = c + 0.5 * rng.normal();
    x.at(i, 1) = -c + 0.5 * rng.normal();
  }
  nn::ParameterStore store;
  const auto hidden = nn::Dense::create(store, "h", 2, 8, nn::Activation::relu, 1);
  const auto head = nn::Dense::create(store, "o", 8, 1, nn::Activation::identity, 1);
  auto logits = [&](nn::Tape& tape, std::span<const std::size_t> batch) {
    nn::Tensor xb({batch.size(), 2});
    for (std::size_t i = 0; i < batch.size(); ++i) {
      xb.at(i, 0) = x.at(batch[i], 0);
      xb.at(i, 1) = x.at(batch[i], 1);
    }
    return head.forward(tape, hidden.forward(tape, tape.constant(std::move(xb))));
  };
  auto predict = [&] {
    nn::Tape tape;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto out = logits(tape, all).value();
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = nn::sigmoid(out[i]);
    return p;
  };
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.lr = 0.01;
  cfg.patience = 100;
  const auto result = fit(store, y, logits, y, predict, cfg);
  EXPECT_EQ(result.trace.size(), 15u);
  EXPECT_GE(result.best_val_auc, 0.99);
  EXPECT_NEAR(roc_auc(predict(), y), result.best_val_auc, 1e-12);
  for (std::size_t e = 0; e < result.trace.size(); ++e) EXPECT_EQ(result.trace[e].epoch, e + 1);

  TrainConfig none = cfg;
  none.epochs = 0;
  EXPECT_EQ(fit(store, y, logits, y, predict, none).best_epoch, 0u);
}

TEST(Trainer, EarlyStopsAndWritesTrace) {
  nn::ParameterStore store;
  auto& w = store.add("w", nn::Tensor({1, 1}, {0.0}));
  const std::vector<int> y{0, 1, 0, 1};
  // Feature carries no signal: validation never improves past the first epoch.
  auto logits = [&](nn::Tape& tape, std::span<const std::size_t> batch) {
    return nn::matmul(tape.constant(nn::Tensor({batch.size(), 1}, 1.0)), tape.parameter(w));
  };
  auto predict = [&] { return std::vector<double>(4, nn::sigmoid(w.value[0])); };
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.patience = 3;
  cfg.batch_size = 2;
  const auto r = fit(store, y, logits, y, predict, cfg);
  EXPECT_LT(r.trace.size(), 50u);
  const auto path = fs::temp_directory_path() / "templink_test_trace.csv";
  write_trace(path, r.trace);
  const auto text = read_file(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,train_loss,val_auc,lr");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), r.trace.size() + 1);
}

TEST(Trainer, NonFiniteLossIsReported) {
  nn::ParameterStore store;
  auto& w = store.add("w", nn::Tensor({1, 1}, {std::nan("")}));
  const std::vector<int> y{0, 1};
  auto logits = [&](nn::Tape& tape, std::span<const std::size_t> batch) {
    return nn::matmul(tape.constant(nn::Tensor({batch.size(), 1}, 1.0)), tape.parameter(w));
  };
  auto predict = [&] { return std::vector<double>(2, 0.5); };
  try {
    fit(store, y, logits, y, predict, TrainConfig{});
    FAIL() << "expected numeric_error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::numeric_error);
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST(LinkModels, TrainOnTheToySplitBeatsChance) {
  const auto& data = shared_data();
  TrainConfig tcfg;
  tcfg.epochs = 4;
  tcfg.seed = 1;
  auto cfg = toy_model_config(Variant::two_seal, FeatureMode::modified_sl, 1);
  cfg.conv_dims = {16, 16};
  const auto trained = train_link_model(data.graph, data.split, cfg, tcfg, nullptr, nullptr);
  EXPECT_GE(trained.result.trace.size(), 1u);
  const auto test = prepare_samples(data.graph, data.split[Segment::test], cfg, nullptr);
  const auto auc = roc_auc(trained.model.predict(test, nullptr), sample_labels(data.split[Segment::test]));
  EXPECT_GT(auc, 0.6);

  // Identical inputs and seeds give identical weights.
  const auto again = train_link_model(data.graph, data.split, cfg, tcfg, nullptr, nullptr);
  for (std::size_t i = 0; i < again.model.params().all().size(); ++i) {
    EXPECT_EQ(again.model.params().all()[i]->value, trained.model.params().all()[i]->value);
  }
}

TEST(LinkModels, RnnLinkScorerLearnsFromSeries) {
  const auto& data = shared_data();
  TrainConfig tcfg;
  tcfg.epochs = 4;
  tcfg.seed = 2;
  auto cfg = toy_model_config(Variant::rnn_link, FeatureMode::et, 2);
  cfg.rnn_hidden = 16;
  const auto trained = train_rnn_link(data.graph, data.split, cfg, tcfg);
  const auto& test = data.split[Segment::test];
  const auto series = sample_series(data.graph, test, trained.model.period_for(test.window));
  EXPECT_GT(roc_auc(trained.model.predict(series), sample_labels(test)), 0.7);
}

TEST(SegmentNodes, SubsampleIsSortedAndInsideTheSegment) {
  SplitConfig sc;
  sc.t0 = 0;
  sc.t1 = 1;
  sc.t2 = 2;
  const auto nodes = segment_nodes(1000, Segment::val, sc, 50, 3);
  EXPECT_EQ(nodes.size(), 50u);
  EXPECT_TRUE(std::is_sorted(nodes.begin(), nodes.end()));
  for (auto u : nodes) EXPECT_EQ(segment_of(u, 1000, sc), Segment::val);
  EXPECT_EQ(segment_nodes(1000, Segment::val, sc, 0, 3).size(), 200u);
}
