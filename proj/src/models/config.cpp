// SPDX-License-Identifier: Apache-2.0
#include "templink/models/config.hpp"

#include "templink/error.hpp"
#include "templink/io.hpp"

namespace templink {

Variant parse_variant(std::string_view name) {
  if (name == "rnn" || name == "rnn_link") return Variant::rnn_link;
  if (name == "seal") return Variant::seal;
  if (name == "seal-rnn" || name == "seal_rnn") return Variant::seal_rnn;
  if (name == "2seal" || name == "2-seal" || name == "two_seal") return Variant::two_seal;
  if (name == "2seal-rnn" || name == "2-seal-rnn" || name == "two_seal_rnn") return Variant::two_seal_rnn;
  if (name == "wl-seal" || name == "wl_seal") return Variant::wl_seal;
  if (name == "gcn" || name == "gcn_score") return Variant::gcn_score;
  if (name == "gcn-lpatt" || name == "gcn_score_lpatt") return Variant::gcn_score_lpatt;
  fail(ErrorCode::invalid_argument, "unknown variant '" + std::string(name) +
                                        "' (expected rnn, seal, seal-rnn, 2seal, 2seal-rnn, wl-seal, gcn, gcn-lpatt)");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::rnn_link: return "rnn";
    case Variant::seal: return "seal";
    case Variant::seal_rnn: return "seal-rnn";
    case Variant::two_seal: return "2seal";
    case Variant::two_seal_rnn: return "2seal-rnn";
    case Variant::wl_seal: return "wl-seal";
    case Variant::gcn_score: return "gcn";
    case Variant::gcn_score_lpatt: return "gcn-lpatt";
  }
  return "seal";
}

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "et") return FeatureMode::et;
  if (name == "et+sl" || name == "et_sl") return FeatureMode::et_sl;
  if (name == "sl") return FeatureMode::sl;
  if (name == "modified-sl" || name == "modified_sl" || name == "msl") return FeatureMode::modified_sl;
  fail(ErrorCode::invalid_argument, "unknown feature mode '" + std::string(name) +
                                        "' (expected et, et+sl, sl, modified-sl)");
}

std::string_view to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::et: return "et";
    case FeatureMode::et_sl: return "et+sl";
    case FeatureMode::sl: return "sl";
    case FeatureMode::modified_sl: return "modified-sl";
  }
  return "sl";
}

void ModelConfig::validate() const {
  if (conv_dims.empty()) fail(ErrorCode::config_error, "model.conv_dims needs at least one layer");
  for (auto d : conv_dims) {
    if (d == 0) fail(ErrorCode::config_error, "model.conv_dims entries must be positive");
  }
  if (rnn_hidden == 0 || dense_hidden == 0 || readout_channels == 0 || period_steps == 0) {
    fail(ErrorCode::config_error, "model widths must be positive");
  }
  if (sort_k < 2) fail(ErrorCode::config_error, "model.k must be at least 2");
  if (readout_span == 0 || readout_span > sort_k) fail(ErrorCode::config_error, "model.readout_span must be in [1, k]");
  if (hop != 1 && hop != 2) fail(ErrorCode::config_error, "model.hop must be 1 or 2");
  if (cap < 2) fail(ErrorCode::config_error, "model.cap must be at least 2");
  if (variant == Variant::rnn_link) return;
  if (is_gcn()) return;
  if (features == FeatureMode::et && variant == Variant::wl_seal) {
    fail(ErrorCode::config_error, "wl-seal orders nodes by structural labels and needs an SL feature mode");
  }
}

ModelConfig ModelConfig::from_config(const Config& c) {
  ModelConfig m;
  m.variant = parse_variant(c.get_string("model.variant", std::string(to_string(m.variant))));
  m.features = parse_feature_mode(c.get_string("model.features", std::string(to_string(m.features))));
  m.conv_dims = c.get_sizes("model.conv_dims", m.conv_dims);
  m.rnn_hidden = static_cast<std::size_t>(c.get_int("model.rnn_hidden", static_cast<std::int64_t>(m.rnn_hidden)));
  m.dense_hidden = static_cast<std::size_t>(c.get_int("model.dense_hidden", static_cast<std::int64_t>(m.dense_hidden)));
  m.sort_k = static_cast<std::size_t>(c.get_int("model.k", static_cast<std::int64_t>(m.sort_k)));
  m.readout_channels =
      static_cast<std::size_t>(c.get_int("model.readout_channels", static_cast<std::int64_t>(m.readout_channels)));
  m.readout_span = static_cast<std::size_t>(c.get_int("model.readout_span", static_cast<std::int64_t>(m.readout_span)));
  m.l_max = static_cast<std::size_t>(c.get_int("model.l_max", static_cast<std::int64_t>(m.l_max)));
  m.period_steps = static_cast<std::size_t>(c.get_int("feature.period_steps", static_cast<std::int64_t>(m.period_steps)));
  m.hop = static_cast<int>(c.get_int("model.hop", m.hop));
  m.cap = static_cast<std::size_t>(c.get_int("model.cap", static_cast<std::int64_t>(m.cap)));
  m.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  return m;
}

void ModelConfig::to_config(Config& c) const {
  c.set("model.variant", std::string(to_string(variant)));
  c.set("model.features", std::string(to_string(features)));
  std::string dims;
  for (auto d : conv_dims) dims += (dims.empty() ? "" : ",") + std::to_string(d);
  c.set("model.conv_dims", dims);
  c.set("model.rnn_hidden", std::to_string(rnn_hidden));
  c.set("model.dense_hidden", std::to_string(dense_hidden));
  c.set("model.k", std::to_string(sort_k));
  c.set("model.readout_channels", std::to_string(readout_channels));
  c.set("model.readout_span", std::to_string(readout_span));
  c.set("model.l_max", std::to_string(l_max));
  c.set("feature.period_steps", std::to_string(period_steps));
  c.set("model.hop", std::to_string(hop));
  c.set("model.cap", std::to_string(cap));
  c.set("seed", std::to_string(seed));
}

void TrainConfig::validate() const {
  if (batch_size == 0) fail(ErrorCode::config_error, "train.batch_size must be positive");
  if (!(lr > 0.0)) fail(ErrorCode::config_error, "train.lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail(ErrorCode::config_error, "train.lr_decay must be in (0, 1]");
  if (patience == 0 || lr_patience == 0) fail(ErrorCode::config_error, "train patience values must be positive");
}

TrainConfig TrainConfig::from_config(const Config& c, const std::string& prefix) {
  TrainConfig t;
  auto key = [&](const char* name) {
    const std::string specific = prefix + "." + name;
    return c.has(specific) ? specific : std::string("train.") + name;
  };
  t.epochs = static_cast<std::size_t>(c.get_int(key("epochs"), static_cast<std::int64_t>(t.epochs)));
  t.batch_size = static_cast<std::size_t>(c.get_int(key("batch_size"), static_cast<std::int64_t>(t.batch_size)));
  t.lr = c.get_double(key("lr"), t.lr);
  t.lr_decay = c.get_double(key("lr_decay"), t.lr_decay);
  t.lr_patience = static_cast<std::size_t>(c.get_int(key("lr_patience"), static_cast<std::int64_t>(t.lr_patience)));
  t.patience = static_cast<std::size_t>(c.get_int(key("patience"), static_cast<std::int64_t>(t.patience)));
  t.seed = static_cast<std::uint64_t>(c.get_int("seed", 0));
  return t;
}

}  // namespace templink
