// SPDX-License-Identifier: Apache-2.0
// templink command-line driver: one subcommand per pipeline step.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "templink/error.hpp"
#include "templink/io.hpp"
#include "templink/log.hpp"
#include "templink/parallel.hpp"
#include "templink/pipeline.hpp"

namespace {

using namespace templink;

struct CommonOptions {
  std::vector<std::string> configs;
  std::optional<std::int64_t> seed;
  std::size_t threads = 0;
  std::string out_dir = "run";
  std::string data_dir;
  std::optional<std::string> protocol;
  std::optional<int> hop;
  std::optional<std::int64_t> cap;
  std::optional<double> alpha;
};

Config build_config(const CommonOptions& o) {
  Config cfg = default_config();
  for (const auto& path : o.configs) cfg.merge(Config::load(path));
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (o.hop) cfg.set("model.hop", std::to_string(*o.hop));
  if (o.cap) cfg.set("model.cap", std::to_string(*o.cap));
  if (o.alpha) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", *o.alpha);
    cfg.set("split.alpha", buf);
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.configs, "Config file(s) layered over the built-in defaults");
  cmd->add_option("--seed", o.seed, "Master seed (generator, sampling, initialization)");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores); results do not depend on it");
  cmd->add_option("--out-dir", o.out_dir, "Experiment workspace")->capture_default_str();
  cmd->add_option("--data-dir", o.data_dir, "Dataset directory (default: <out-dir>/data)");
}

void add_protocol(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--protocol", o.protocol, "oot or edge")->check(CLI::IsMember({"oot", "edge", "out_of_time", "edge_sampling"}));
}

void add_model_shape(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--hop", o.hop, "Enclosing-subgraph radius (1 or 2)");
  cmd->add_option("--cap", o.cap, "Maximum subgraph size");
}

Protocol protocol_of(const CommonOptions& o, const Config& cfg) {
  return parse_protocol(o.protocol ? *o.protocol : cfg.get_string("split.protocol", "oot"));
}

void print_row(const ResultRow& r) { std::cout << format_result(r) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal link prediction with enclosing-subgraph GNNs"};
  app.require_subcommand(1);
  CommonOptions o;
  std::string kind = "all";
  std::string variant;
  std::string features = "modified-sl";

  auto* generate = app.add_subcommand("generate", "Write the synthetic dataset, Bayes oracle and credit labels");
  add_common(generate, o);

  auto* split = app.add_subcommand("split", "Sample train/val/test pairs for a protocol");
  add_common(split, o);
  add_protocol(split, o);
  split->add_option("--alpha", o.alpha, "Negatives per positive");

  auto* baseline = app.add_subcommand("baseline", "Score the test set with a topological heuristic");
  add_common(baseline, o);
  add_protocol(baseline, o);
  baseline->add_option("--kind", kind, "CN, AA, RA, Jaccard, PA or all")->capture_default_str();

  auto* pretrain = app.add_subcommand("pretrain", "Pretrain the node encoder on credit labels");
  add_common(pretrain, o);

  auto* train = app.add_subcommand("train", "Train a model and write its checkpoint and log");
  add_common(train, o);
  add_protocol(train, o);
  add_model_shape(train, o);
  train->add_option("--variant", variant, "rnn, seal, seal-rnn, 2seal, 2seal-rnn, wl-seal, gcn, gcn-lpatt")->required();
  train->add_option("--features", features, "et, et+sl, sl, modified-sl")->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Score the test set with a trained model");
  add_common(evaluate, o);
  add_protocol(evaluate, o);
  add_model_shape(evaluate, o);
  evaluate->add_option("--variant", variant, "Model variant, or 'encoder' for the pretrained credit RNN")->required();
  evaluate->add_option("--features", features, "et, et+sl, sl, modified-sl")->capture_default_str();

  auto* report = app.add_subcommand("report", "Collect metrics into results.csv and results.txt");
  add_common(report, o);

  auto* run = app.add_subcommand("run", "Run every step listed by the pipeline.* config keys");
  add_common(run, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: invalid_argument: " << e.what() << '\n';
    return 2;
  }

  try {
    set_thread_count(o.threads);
    const Config cfg = build_config(o);
    Pipeline pipeline(cfg, Workspace(o.out_dir, o.data_dir));

    if (*generate) {
      pipeline.generate();
    } else if (*split) {
      const auto& s = pipeline.make_split(protocol_of(o, cfg));
      for (auto seg : kSegments) {
        std::cout << to_string(seg) << ": " << s[seg].samples.size() << " samples, " << s[seg].positives()
                  << " positives\n";
      }
    } else if (*baseline) {
      const auto p = protocol_of(o, cfg);
      if (kind == "all") {
        for (auto k : kAllHeuristics) print_row(pipeline.baseline(k, p));
      } else {
        print_row(pipeline.baseline(parse_heuristic(kind), p));
      }
    } else if (*pretrain) {
      pipeline.pretrain();
    } else if (*train) {
      const auto r = pipeline.train(parse_variant(variant), parse_feature_mode(features), protocol_of(o, cfg));
      std::cout << "epochs " << r.trace.size() << ", best epoch " << r.best_epoch << ", validation AUC "
                << r.best_val_auc << '\n';
    } else if (*evaluate) {
      if (variant == "encoder") {
        print_row(pipeline.evaluate_encoder());
      } else {
        print_row(pipeline.evaluate(parse_variant(variant), parse_feature_mode(features), protocol_of(o, cfg)));
      }
    } else if (*report) {
      pipeline.report();
      std::cout << read_file(std::filesystem::path(o.out_dir) / "results.txt");
    } else if (*run) {
      pipeline.run_all();
      std::cout << read_file(std::filesystem::path(o.out_dir) / "results.txt");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
