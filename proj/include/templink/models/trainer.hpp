// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "templink/models/config.hpp"
#include "templink/nn/tensor.hpp"

namespace templink {

/// One line of the training log (`epoch,train_loss,val_auc,lr`). When the
/// validation labels hold a single class the AUC is undefined and stored as
/// NaN; model selection then falls back to validation log-loss.
struct TraceRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  std::size_t best_epoch = 0;  // 0 = initialization kept
  double best_val_auc = 0.0;
};

/// Logits [batch, 1] for the training items listed in `batch`.
using BatchLogits = std::function<nn::Var(nn::Tape&, std::span<const std::size_t> batch)>;
/// Probabilities for every validation item, in order.
using Predictor = std::function<std::vector<double>()>;

/// Mini-batch Adam on binary cross-entropy. Items are shuffled per epoch from
/// a stream keyed by (seed, epoch); the learning rate is multiplied by
/// lr_decay after lr_patience epochs without validation improvement, and
/// training stops after `patience` such epochs. The best validation snapshot
/// is restored into `params` on return. A non-finite loss aborts with
/// numeric_error naming the epoch and batch.
TrainResult fit(nn::ParameterStore& params, std::span<const int> train_labels, const BatchLogits& logits,
                std::span<const int> val_labels, const Predictor& predict_val, const TrainConfig& cfg);

void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

/// Mean binary log-loss of probabilities (clamped away from 0 and 1).
double log_loss(std::span<const double> probs, std::span<const int> labels);

}  // namespace templink
