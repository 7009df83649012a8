// Copyright 2026 The relclust Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relclust/config.hpp"
#include "relclust/dataset.hpp"
#include "relclust/engine.hpp"
#include "relclust/errors.hpp"
#include "relclust/metrics.hpp"
#include "relclust/oracle.hpp"
#include "relclust/report.hpp"
#include "relclust/service.hpp"

namespace fs = std::filesystem;
using namespace relclust;

namespace {

constexpr std::string_view kSynthPrefix = "synth:";

bool is_synth(const std::string &data) { return data.rfind(kSynthPrefix, 0) == 0; }

Dataset open_data(const std::string &data, std::optional<uint64_t> seed_override = {}) {
  if (is_synth(data)) {
    SynthSpec spec = parse_synth_spec(data.substr(kSynthPrefix.size()));
    if (seed_override) spec.seed = *seed_override;
    return generate_synthetic(spec);
  }
  return load_dataset(data, format_for_path(data));
}

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<int> budget;
  std::optional<int> per_round;
  std::optional<std::string> strategy;
};

void add_common(CLI::App *cmd, CommonOpts &o) {
  cmd->add_option("--config", o.config_file, "Flat key = value config file");
  cmd->add_option("--set", o.overrides, "Config override key=value (repeatable)");
  cmd->add_option("--budget", o.budget, "Maximum number of labeled key points");
  cmd->add_option("--per-round", o.per_round, "Key points labeled per round");
}

RunConfig build_config(const CommonOpts &o) {
  RunConfig cfg;
  if (!o.config_file.empty()) cfg = load_config(o.config_file);
  for (const auto &kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kv);
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.budget) cfg.budget = *o.budget;
  if (o.per_round) cfg.per_round = *o.per_round;
  if (o.strategy) cfg.strategy = parse_strategy(*o.strategy);
  return cfg;
}

void print_final(const RunResult &r) {
  std::cout << "stop: " << (r.completed ? r.stop_reason : "interrupted") << ", iterations "
            << r.history.size() << ", labeled " << r.keys.size() << ", relations "
            << r.relations.size() << '\n';
  if (r.final_metrics) std::cout << to_json(*r.final_metrics).dump(2) << '\n';
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Actively supervised relation clustering"};
  app.require_subcommand(1);

  // run
  CommonOpts run_opts;
  std::string run_data, oracle_kind = "gold", out_dir = "out", host = "127.0.0.1", static_dir;
  std::optional<uint64_t> run_seed;
  double val_fraction = 0.0;
  int port = 8080;
  int timeout_s = 24 * 3600;
  bool resume = false;
  auto *run = app.add_subcommand("run", "Run the labeling and training loop");
  run->add_option("--data", run_data, "Dataset path (.jsonl or .bin) or synth:<spec>")->required();
  run->add_option("--strategy", run_opts.strategy, "ours, random, confidence, margin, entropy, gradient");
  run->add_option("--oracle", oracle_kind, "gold, console or http")
      ->check(CLI::IsMember({"gold", "console", "http"}));
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", run_seed, "Run seed");
  run->add_option("--val-fraction", val_fraction, "Hold out this fraction for validation");
  run->add_flag("--resume", resume, "Continue from <out>/checkpoint");
  run->add_option("--host", host, "Bind address for the http oracle");
  run->add_option("--port", port, "Port for the http oracle (0 picks one)");
  run->add_option("--static-dir", static_dir, "Built annotation UI to serve");
  run->add_option("--timeout", timeout_s, "Seconds to wait for a label batch");
  add_common(run, run_opts);

  // bench
  CommonOpts bench_opts;
  std::string bench_data, bench_out = "bench";
  std::vector<std::string> bench_strategies = {"ours", "random", "confidence", "margin", "entropy",
                                               "gradient"};
  std::vector<uint64_t> bench_seeds = {1, 2, 3, 4, 5};
  auto *bench = app.add_subcommand("bench", "Compare strategies across seeds");
  bench->add_option("--data", bench_data, "synth:<spec> (reseeded per run) or dataset path")
      ->required();
  bench->add_option("--strategies", bench_strategies, "Strategies to compare");
  bench->add_option("--seeds", bench_seeds, "Seeds");
  bench->add_option("--out", bench_out, "Output directory");
  add_common(bench, bench_opts);

  // score
  std::string score_data, score_assign;
  auto *score = app.add_subcommand("score", "Score stored assignments against gold labels");
  score->add_option("--data", score_data, "Dataset with gold labels")->required();
  score->add_option("--assignments", score_assign, "assignments.tsv from a run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      RunConfig cfg = build_config(run_opts);
      if (run_seed) cfg.seed = *run_seed;
      cfg.validate();
      const Dataset full = open_data(run_data);
      std::optional<Dataset> train, val;
      if (val_fraction > 0) {
        auto [t, v] = split_validation(full, val_fraction, cfg.seed);
        train.emplace(std::move(t));
        val.emplace(std::move(v));
      }
      const Dataset &ds = train ? *train : full;

      RunMonitor monitor;
      AnnotationQueue queue;
      std::unique_ptr<Oracle> oracle;
      std::unique_ptr<AnnotationService> service;
      if (oracle_kind == "gold") {
        oracle = std::make_unique<GoldOracle>(ds);
      } else if (oracle_kind == "console") {
        oracle = std::make_unique<ConsoleOracle>(std::cin, std::cout);
      } else {
        oracle = std::make_unique<QueueOracle>(queue, std::chrono::seconds(timeout_s));
        service = std::make_unique<AnnotationService>(queue, monitor, static_dir);
        const int bound = service->start(host, port);
        std::cerr << "annotation service on http://" << host << ':' << bound << '\n';
      }

      EngineOptions opts;
      opts.validation = val ? &*val : nullptr;
      opts.checkpoint_dir = fs::path(out_dir) / "checkpoint";
      opts.monitor = &monitor;
      Engine engine = resume ? Engine::resume(opts.checkpoint_dir, ds, *oracle, opts)
                             : Engine(cfg, ds, *oracle, opts);
      const RunResult result = engine.run();
      queue.cancel();
      if (service) service->stop();
      emit_report(out_dir, ds, result);
      print_final(result);
      if (!result.completed) {
        std::cerr << "oracle unavailable; resume with --resume --out " << out_dir << '\n';
        return 3;
      }
      return 0;
    }

    if (*bench) {
      RunConfig cfg = build_config(bench_opts);
      cfg.validate();
      std::vector<Strategy> strategies;
      for (const auto &s : bench_strategies) strategies.push_back(parse_strategy(s));
      std::optional<Dataset> fixed;
      if (!is_synth(bench_data)) fixed.emplace(open_data(bench_data));
      const auto rows = bench_sweep(cfg, strategies, bench_seeds, [&](uint64_t seed) {
        return fixed ? *fixed : open_data(bench_data, seed);
      });
      fs::create_directories(bench_out);
      write_text(fs::path(bench_out) / "discovery.csv", bench_discovery_csv(rows));
      write_text(fs::path(bench_out) / "quality.csv", bench_quality_csv(rows));
      std::cout << bench_discovery_csv(rows) << '\n' << bench_quality_csv(rows);
      return 0;
    }

    if (*score) {
      const Dataset ds = open_data(score_data);
      const auto rows = read_assignments(score_assign);
      std::vector<std::string> labels(ds.size());
      std::vector<char> seen(ds.size(), 0);
      std::vector<std::string> discovered;
      for (const auto &r : rows) {
        const auto idx = ds.index_of(r.id);
        if (!idx) throw ContractError("assignment for unknown id " + std::to_string(r.id));
        labels[*idx] = r.relation;
        seen[*idx] = 1;
        if (r.is_key) discovered.push_back(r.relation);
      }
      for (size_t i = 0; i < ds.size(); ++i)
        if (!seen[i]) throw ContractError("no assignment for id " + std::to_string(ds[i].id));
      const auto report = Scorer::evaluate(ds, labels, discovered, 0);
      if (!report) throw ContractError("dataset carries no gold labels");
      std::cout << to_json(*report).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
