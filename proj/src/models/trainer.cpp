// SPDX-License-Identifier: Apache-2.0
#include "templink/models/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "templink/error.hpp"
#include "templink/evaluation.hpp"
#include "templink/io.hpp"
#include "templink/log.hpp"
#include "templink/nn/ops.hpp"
#include "templink/nn/optim.hpp"
#include "templink/rng.hpp"

namespace templink {

namespace {

bool has_both_classes(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (int y : labels) (y != 0 ? pos : neg) = true;
  return pos && neg;
}

std::vector<nn::Tensor> snapshot(const nn::ParameterStore& params) {
  std::vector<nn::Tensor> out;
  for (const auto* p : params.all()) out.push_back(p->value);
  return out;
}

void load_snapshot(nn::ParameterStore& params, const std::vector<nn::Tensor>& values) {
  auto all = params.all();
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = values[i];
}

}  // namespace

double log_loss(std::span<const double> probs, std::span<const int> labels) {
  require(probs.size() == labels.size(), "log_loss: size mismatch");
  if (probs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], 1e-12, 1.0 - 1e-12);
    total -= labels[i] != 0 ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(probs.size());
}

TrainResult fit(nn::ParameterStore& params, std::span<const int> train_labels, const BatchLogits& logits,
                std::span<const int> val_labels, const Predictor& predict_val, const TrainConfig& cfg) {
  cfg.validate();
  if (train_labels.empty()) fail(ErrorCode::invalid_argument, "training set is empty");
  if (val_labels.empty()) fail(ErrorCode::invalid_argument, "validation set is empty");

  const bool auc_metric = has_both_classes(val_labels);
  auto evaluate = [&](double& auc) {
    const auto probs = predict_val();
    if (auc_metric) {
      auc = roc_auc(probs, val_labels);
      return auc;
    }
    auc = std::numeric_limits<double>::quiet_NaN();
    return -log_loss(probs, val_labels);
  };

  TrainResult result;
  if (cfg.epochs == 0) return result;

  double init_auc = 0.0;
  double best_metric = evaluate(init_auc);
  result.best_val_auc = init_auc;
  auto best_values = snapshot(params);

  nn::AdamConfig adam;
  adam.lr = cfg.lr;
  nn::AdamState state;
  std::size_t since_best = 0;
  std::size_t since_decay = 0;

  std::vector<std::size_t> order(train_labels.size());
  std::vector<double> batch_labels;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed, {0x7a1e, epoch});
    shuffle(order, rng);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      batch_labels.clear();
      for (auto i : batch) batch_labels.push_back(train_labels[i] != 0 ? 1.0 : 0.0);

      params.zero_grad();
      nn::Tape tape;
      const nn::Var out = logits(tape, batch);
      const nn::Var loss = nn::bce_with_logits(out, batch_labels);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        fail(ErrorCode::numeric_error, "non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                           std::to_string(batch_index) + " (lr " + format_double(adam.lr, 8) + ")");
      }
      tape.backward(loss);
      nn::adam_step(params, state, adam);
      loss_sum += value * static_cast<double>(batch.size());
    }

    double auc = 0.0;
    const double metric = evaluate(auc);
    result.trace.push_back({epoch, loss_sum / static_cast<double>(order.size()), auc, adam.lr});
    log_info("epoch ", epoch, " loss ", format_double(result.trace.back().train_loss), " val_auc ",
             format_double(auc), " lr ", adam.lr);

    if (metric > best_metric) {
      best_metric = metric;
      result.best_epoch = epoch;
      result.best_val_auc = auc;
      best_values = snapshot(params);
      since_best = 0;
      since_decay = 0;
    } else {
      ++since_best;
      ++since_decay;
      if (since_best >= cfg.patience) break;
      if (since_decay >= cfg.lr_patience) {
        adam.lr *= cfg.lr_decay;
        since_decay = 0;
      }
    }
  }
  load_snapshot(params, best_values);
  return result;
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  auto out = open_output(path);
  out << "epoch,train_loss,val_auc,lr\n";
  for (const auto& r : trace) {
    out << r.epoch << ',' << format_double(r.train_loss, 8) << ','
        << (std::isnan(r.val_auc) ? std::string("nan") : format_double(r.val_auc, 8)) << ','
        << format_double(r.lr, 10) << '\n';
  }
  if (!out) fail(ErrorCode::io_error, "failed writing " + path.string());
}

}  // namespace templink
