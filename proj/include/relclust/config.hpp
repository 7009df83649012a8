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
#include <iosfwd>
#include <string>

namespace relclust {

// Key-point selection strategy. kDensityPeaks is the density/sparsity
// strategy; the rest are the classical active-learning baselines.
enum class Strategy { kDensityPeaks, kRandom, kConfidence, kMargin, kEntropy, kGradient };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string &name);  // "ours", "random", ...

enum class Activation { kTanh, kLinear };

struct RunConfig {
  // Labeling.
  int per_round = 20;            // B
  int budget = 80;               // N*
  double dc_percentile = 40.0;   // D_c rank among pair distances, descending
  double candidate_factor = 1.2;
  int max_geometry_n = 2000;     // subsample cap for the distance matrix
  Strategy strategy = Strategy::kDensityPeaks;

  // Pseudo-label reliability tiers, percent of instances included.
  double theta_ce = 20.0;
  double theta_bce = 60.0;

  // Representation learning.
  int proj_dim = 256;
  int low_dim = 32;
  Activation activation = Activation::kTanh;
  double sigma = 2.0;
  double lr = 1e-4;
  int batch = 100;
  int pairs_per_batch = 64;
  int epochs_per_iter = 5;
  int ae_warmup_epochs = 0;
  double w_rec = 1.0;
  double w_ce = 1.0;
  double w_bce = 1.0;

  // Loop control.
  int refine_iters = 3;          // post-labeling iterations, at least 3 run
  int train_rounds_per_iter = 1;
  int max_iterations = 100;

  uint64_t seed = 1;

  // Throws ConfigError on the first violated constraint.
  void validate() const;
};

// Sets one field from a `key = value` pair. Throws ConfigError on an unknown
// key or an unparsable value.
void set_config_value(RunConfig &cfg, const std::string &key,
                      const std::string &value);

// Flat `key = value` text, one pair per line, '#' starts a comment.
RunConfig parse_config_text(std::istream &in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path &path, RunConfig base = {});
std::string dump_config(const RunConfig &cfg);

}  // namespace relclust
