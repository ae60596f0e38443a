// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace templink {

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half. O(m log m) via mid-ranks. Requires both
/// classes.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// 2 * auc - 1.
double gini(double auc);

/// One line of results.csv.
struct ResultRow {
  std::string method;
  std::string protocol;
  std::string feature_mode;
  std::uint64_t seed = 0;
  double auc = 0.0;
  std::size_t n_samples = 0;

  double gini_index() const { return gini(auc); }
  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kResultsHeader = "method,protocol,feature_mode,seed,auc,gini,n_samples";

std::string format_result(const ResultRow& row);
void write_results_csv(const std::filesystem::path& path, std::vector<ResultRow> rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Fixed-width text table of method x protocol x feature mode with the mean
/// and per-seed AUC, for humans.
std::string results_table(const std::vector<ResultRow>& rows);

/// Collects every metrics file (*.csv with the results header) under
/// `metrics_dir`, sorts rows canonically and writes results.csv and
/// results.txt into `out_dir`. Extra rows (for example the Bayes oracle)
/// are merged in. Throws io_error when no metrics files exist.
std::vector<ResultRow> report(const std::filesystem::path& metrics_dir, const std::filesystem::path& out_dir,
                              std::vector<ResultRow> extra = {});

}  // namespace templink
