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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relclust/config.hpp"
#include "relclust/dataset.hpp"
#include "relclust/learner.hpp"
#include "relclust/metrics.hpp"
#include "relclust/oracle.hpp"
#include "relclust/pseudo.hpp"
#include "relclust/selection.hpp"

namespace relclust {

struct IterationRecord {
  int iteration = 0;
  bool labeling = false;         // a labeling round ran in this iteration
  int labeled = 0;
  int total_labeled = 0;
  int new_relations = 0;
  int consecutive_no_new = 0;
  int relations = 0;
  double changed_fraction = 1.0;  // assignments that moved since last iteration
  size_t high_size = 0;
  size_t moderate_size = 0;
  double loss_rec = 0.0;          // means over the last training epoch
  double loss_ce = 0.0;
  double loss_bce = 0.0;
  std::vector<int64_t> chosen;    // ids sent to the oracle
  std::optional<MetricsReport> metrics;
  std::optional<MetricsReport> val_metrics;
};

// Labels requested from the oracle but not all answered yet.
struct PendingBatch {
  int iteration = 0;
  std::vector<size_t> rows;
  std::vector<LabelResponse> partial;
};

struct RunState {
  explicit RunState(Learner l) : learner(std::move(l)) {}

  int iteration = 0;
  Learner learner;
  KeyPointSet keys;
  RelationSet relations;
  StopState stop;
  std::vector<IterationRecord> history;
  int refine_done = 0;       // iterations run after labeling stopped
  int stable_streak = 0;     // consecutive refinement iterations below tolerance
  std::vector<std::string> last_labels;
  std::optional<PendingBatch> pending;
  bool finished = false;
  std::string stop_reason;
};

// Thread-safe snapshot of a run for readers outside the engine thread.
class RunMonitor {
 public:
  struct Snapshot {
    std::string status = "starting";  // starting, running, waiting, finished, interrupted, failed
    int iteration = 0;
    int total_labeled = 0;
    int budget = 0;
    int per_round = 0;
    Strategy strategy = Strategy::kDensityPeaks;
    std::vector<IterationRecord> history;
  };

  void configure(const RunConfig &cfg);
  void set_status(const std::string &status);
  void publish(const RunState &state, const std::string &status);
  Snapshot snapshot() const;

 private:
  mutable std::mutex mu_;
  Snapshot snap_;
};

struct EngineOptions {
  const Dataset *validation = nullptr;  // scored each iteration when set
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  RunMonitor *monitor = nullptr;
  int context_neighbors = 3;  // labeled and unlabeled neighbors per request
};

struct RunResult {
  bool completed = false;
  std::string stop_reason;
  std::vector<IterationRecord> history;
  RelationSet relations;
  KeyPointSet keys;
  std::vector<std::string> labels;  // per dataset row, "" when no key point exists
  std::vector<double> reliability;
  std::optional<MetricsReport> final_metrics;
};

// Alternates key-point labeling with pseudo-label training until labeling
// has stopped and the representation has settled.
class Engine {
 public:
  Engine(const RunConfig &cfg, const Dataset &ds, Oracle &oracle, EngineOptions opts = {});

  // Continues a run from a checkpoint directory written by an earlier run.
  static Engine resume(const std::filesystem::path &dir, const Dataset &ds, Oracle &oracle,
                       EngineOptions opts = {});

  // Runs to completion. Oracle failure checkpoints and returns with
  // completed = false.
  RunResult run();
  // One iteration; returns false once the run is finished.
  bool step();

  const RunState &state() const { return state_; }
  const RunConfig &config() const { return cfg_; }
  RunResult result() const;

  void save_checkpoint(const std::filesystem::path &dir) const;

 private:
  Engine(const RunConfig &cfg, const Dataset &ds, Oracle &oracle, EngineOptions opts,
         RunState state);

  void labeling_round(const Eigen::MatrixXd &low);
  std::vector<size_t> choose_rows(const Eigen::MatrixXd &low, const Encoded &enc, int count);
  std::vector<LabelRequest> build_requests(const Eigen::MatrixXd &low,
                                           const std::vector<size_t> &rows) const;
  void apply_responses(const std::vector<size_t> &rows,
                       const std::vector<LabelResponse> &responses, int iteration);
  void finish_round(IterationRecord &rec, const RelationSet &before, int labeled);
  void train(const Eigen::MatrixXd &low, IterationRecord &rec);
  std::vector<size_t> key_rows() const;
  void publish(const std::string &status) const;

  RunConfig cfg_;
  const Dataset &ds_;
  Oracle &oracle_;
  EngineOptions opts_;
  InputScaling scaling_;  // fitted on the training pool
  Eigen::MatrixXd x_;
  RunState state_;
};

// Nearest-key labels for a representation matrix; "" everywhere without keys.
std::vector<PseudoAssignment> assign_or_empty(const Eigen::MatrixXd &low,
                                              const KeyPointSet &keys, size_t n);

// Convenience wrapper: build an engine and run it.
RunResult run_loop(const RunConfig &cfg, const Dataset &ds, Oracle &oracle,
                   EngineOptions opts = {});

}  // namespace relclust
