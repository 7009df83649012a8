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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "relclust/engine.hpp"

namespace relclust {

nlohmann::json to_json(const IterationRecord &rec);
IterationRecord record_from_json(const nlohmann::json &j);

// One row per iteration. Bookkeeping columns first, then the metric columns,
// then val_-prefixed metric columns when a validation set was scored.
// Cells without a value are left empty.
std::string iterations_csv(const std::vector<IterationRecord> &history);

struct RunSummary {
  bool completed = false;
  std::string stop_reason;
  int iterations = 0;
  int total_labeled = 0;
  std::vector<std::pair<std::string, int>> relations;  // name, first-seen iteration
  std::vector<KeyPoint> keys;
  std::optional<MetricsReport> final_metrics;
  std::vector<IterationRecord> history;
};

RunSummary summarize(const RunResult &result);
nlohmann::json to_json(const RunSummary &s);
RunSummary summary_from_json(const nlohmann::json &j);

struct AssignmentRow {
  int64_t id = 0;
  std::string relation;
  double reliability = 0.0;
  bool is_key = false;
};

std::vector<AssignmentRow> assignment_rows(const Dataset &ds, const RunResult &result);
void write_assignments(const std::vector<AssignmentRow> &rows, const std::filesystem::path &path);
std::vector<AssignmentRow> read_assignments(const std::filesystem::path &path);

// Writes iterations.csv, summary.json and assignments.tsv into `dir`.
// Throws IoError when the directory cannot be written.
void emit_report(const std::filesystem::path &dir, const Dataset &ds, const RunResult &result);

void write_text(const std::filesystem::path &path, const std::string &text);

// Strategy sweep. `make_dataset(seed)` builds the pool for one seed.
struct BenchRow {
  Strategy strategy = Strategy::kDensityPeaks;
  uint64_t seed = 0;
  MetricsReport metrics;
  int relations = 0;
  int total_labeled = 0;
};

std::vector<BenchRow> bench_sweep(const RunConfig &base, const std::vector<Strategy> &strategies,
                                  const std::vector<uint64_t> &seeds,
                                  const std::function<Dataset(uint64_t)> &make_dataset);

// Relations discovered per strategy and seed, with the per-strategy sum and mean.
std::string bench_discovery_csv(const std::vector<BenchRow> &rows);
// Mean metric columns per strategy.
std::string bench_quality_csv(const std::vector<BenchRow> &rows);

}  // namespace relclust
