// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "templink/config.hpp"

namespace templink {

enum class Variant { rnn_link, seal, seal_rnn, two_seal, two_seal_rnn, wl_seal, gcn_score, gcn_score_lpatt };

/// Accepts the CLI spellings (rnn, seal, seal-rnn, 2seal, 2seal-rnn, wl-seal,
/// gcn, gcn-lpatt) and the enum names.
Variant parse_variant(std::string_view name);
std::string_view to_string(Variant v);

enum class FeatureMode { et, et_sl, sl, modified_sl };

/// Accepts et, et+sl, sl, modified-sl (and underscore spellings).
FeatureMode parse_feature_mode(std::string_view name);
std::string_view to_string(FeatureMode m);

struct ModelConfig {
  Variant variant = Variant::two_seal;
  FeatureMode features = FeatureMode::modified_sl;
  std::vector<std::size_t> conv_dims{32, 32, 32};
  std::size_t rnn_hidden = 64;
  std::size_t dense_hidden = 32;
  std::size_t sort_k = 30;            // SortPooling K and WL top-K
  std::size_t readout_channels = 16;  // conv1d_readout output channels
  std::size_t readout_span = 1;       // conv1d_readout window, in node slots
  std::size_t l_max = 20;
  std::size_t period_steps = 12;
  int hop = 1;
  std::size_t cap = 256;
  std::uint64_t seed = 0;

  bool uses_link_weights() const {
    return variant == Variant::seal_rnn || variant == Variant::two_seal_rnn || variant == Variant::gcn_score_lpatt;
  }
  bool uses_labels() const { return features != FeatureMode::et; }
  bool uses_embeddings() const {
    return features == FeatureMode::et || features == FeatureMode::et_sl || variant == Variant::gcn_score ||
           variant == Variant::gcn_score_lpatt;
  }
  /// Original SEAL labels measure each distance with the other target
  /// removed; the modified labels keep both targets.
  bool hide_targets() const { return features != FeatureMode::modified_sl; }
  bool is_gcn() const { return variant == Variant::gcn_score || variant == Variant::gcn_score_lpatt; }

  void validate() const;
  static ModelConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double lr_decay = 0.5;          // multiplier applied on a validation plateau
  std::size_t lr_patience = 2;    // epochs without improvement before decaying
  std::size_t patience = 6;       // epochs without improvement before stopping
  std::uint64_t seed = 0;

  void validate() const;
  /// Reads `<prefix>.epochs`, `<prefix>.batch_size`, ... falling back to
  /// `train.*`.
  static TrainConfig from_config(const Config& cfg, const std::string& prefix = "train");
};

}  // namespace templink
