// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "templink/nn/tensor.hpp"

namespace templink::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers, one pair per parameter in store order.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t steps = 0;
};

/// One bias-corrected Adam update of every parameter from its grad buffer.
/// Throws numeric_error (leaving values untouched) on a non-finite gradient.
void adam_step(ParameterStore& store, AdamState& state, const AdamConfig& cfg);

/// Versioned binary checkpoint: string metadata plus name -> shape -> values.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

Checkpoint make_checkpoint(const ParameterStore& store, std::map<std::string, std::string> meta = {});
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Copies checkpoint tensors into a store with the same names and shapes.
void restore(ParameterStore& store, const Checkpoint& ckpt);

}  // namespace templink::nn
