// SPDX-License-Identifier: Apache-2.0
#include "templink/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "templink/error.hpp"
#include "templink/io.hpp"

namespace templink {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorCode::invalid_argument, "roc_auc: scores and labels differ in length");
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the rank sum of positives keeps every quantity an exact integer.
  std::uint64_t positives = 0;
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    std::uint64_t pos_in_tie = 0;
    while (j < m && scores[order[j]] == scores[order[i]]) {
      const int l = labels[order[j]];
      if (l != 0 && l != 1) fail(ErrorCode::invalid_argument, "roc_auc: labels must be 0 or 1");
      pos_in_tie += static_cast<std::uint64_t>(l);
      ++j;
    }
    // Mid-rank of ranks i+1..j is (i + 1 + j) / 2.
    twice_rank_sum += pos_in_tie * (i + 1 + j);
    positives += pos_in_tie;
    i = j;
  }
  const std::uint64_t negatives = m - positives;
  if (positives == 0 || negatives == 0) fail(ErrorCode::invalid_argument, "roc_auc: both classes are required");
  // 2U = 2R - P(P+1); the pair count is P*N.
  const std::uint64_t twice_u = twice_rank_sum - positives * (positives + 1);
  const std::uint64_t twice_pairs = 2 * positives * negatives;
  // Dividing the smaller side makes auc(labels) + auc(flipped) == 1 exactly.
  if (twice_u * 2 <= twice_pairs) return static_cast<double>(twice_u) / static_cast<double>(twice_pairs);
  return 1.0 - static_cast<double>(twice_pairs - twice_u) / static_cast<double>(twice_pairs);
}

double gini(double auc) { return 2.0 * auc - 1.0; }

std::string format_result(const ResultRow& r) {
  return r.method + "," + r.protocol + "," + r.feature_mode + "," + std::to_string(r.seed) + "," +
         format_double(r.auc) + "," + format_double(r.gini_index()) + "," + std::to_string(r.n_samples);
}

namespace {

auto row_key(const ResultRow& r) { return std::tie(r.protocol, r.method, r.feature_mode, r.seed); }

}  // namespace

void write_results_csv(const std::filesystem::path& path, std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return row_key(a) < row_key(b); });
  auto out = open_output(path);
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << format_result(r) << '\n';
  if (!out) fail(ErrorCode::io_error, "failed writing " + path.string());
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  CsvReader reader(path, kResultsHeader);
  std::vector<ResultRow> rows;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 7) reader.error("expected 7 fields");
    ResultRow r;
    r.method = std::string(f[0]);
    r.protocol = std::string(f[1]);
    r.feature_mode = std::string(f[2]);
    r.seed = parse_field<std::uint64_t>(reader, f[3], "seed");
    r.auc = parse_field<double>(reader, f[4], "auc");
    r.n_samples = parse_field<std::size_t>(reader, f[6], "n_samples");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string results_table(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{r.protocol, r.method, r.feature_mode}].push_back(&r);
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-22s %-12s %8s %8s  %s\n", "protocol", "method", "features", "mean_auc",
                "gini", "per-seed auc");
  out << line;
  for (const auto& [key, group] : groups) {
    double mean = 0.0;
    for (const auto* r : group) mean += r->auc;
    mean /= static_cast<double>(group.size());
    std::string seeds;
    for (const auto* r : group) {
      seeds += (seeds.empty() ? "" : " ") + std::to_string(r->seed) + ":" + format_double(r->auc, 4);
    }
    std::snprintf(line, sizeof line, "%-8s %-22s %-12s %8.4f %8.4f  ", std::get<0>(key).c_str(),
                  std::get<1>(key).c_str(), std::get<2>(key).c_str(), mean, gini(mean));
    out << line << seeds << '\n';
  }
  return out.str();
}

std::vector<ResultRow> report(const std::filesystem::path& metrics_dir, const std::filesystem::path& out_dir,
                              std::vector<ResultRow> extra) {
  if (!std::filesystem::is_directory(metrics_dir)) {
    fail(ErrorCode::io_error, "metrics directory " + metrics_dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(metrics_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  if (files.empty()) fail(ErrorCode::io_error, "no run metrics found in " + metrics_dir.string());
  std::sort(files.begin(), files.end());
  std::vector<ResultRow> rows = std::move(extra);
  for (const auto& f : files) {
    auto part = read_results_csv(f);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return row_key(a) < row_key(b); });
  write_results_csv(out_dir / "results.csv", rows);
  auto txt = open_output(out_dir / "results.txt");
  txt << results_table(rows);
  return rows;
}

}  // namespace templink
