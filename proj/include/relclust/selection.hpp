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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relclust/config.hpp"
#include "relclust/geometry.hpp"

namespace relclust {

struct SelectionRound {
  int iteration = 0;
  Strategy strategy = Strategy::kDensityPeaks;
  std::vector<size_t> candidates;  // density-peak strategy only
  std::vector<size_t> chosen;
  double xi_c = 0.0;               // smallest xi in the candidate pool
  bool truncated = false;          // fewer than B eligible points remained
};

// Candidate pool: the ceil(candidate_factor * B) eligible points with the
// largest xi (ties: larger rho, then smaller index). Chosen: the B pool
// members with the largest rho (ties: larger xi, then smaller index).
// `excluded` rows (existing key points) are never eligible.
SelectionRound select_key_points(const GeometryProfile &profile, int budget_b,
                                 double candidate_factor,
                                 std::span<const size_t> excluded = {});

struct StopState {
  int total_labeled = 0;
  int consecutive_no_new = 0;
  int discovered_count = 0;
  int labeling_rounds = 0;
};

// Labeling stops once the budget is spent or two consecutive rounds brought
// no new relation.
bool should_stop(const StopState &state, int budget);

// Records one finished labeling round.
void record_round(StopState &state, int labeled, int new_relations);

// Classical baselines over a pool of `pool_size` rows. `probs` is N x C (rows sum to 1), `penult` the N x k
// features feeding the output layer (gradient strategy only). Scores are
// ranked with ties going to the smaller index; excluded rows are skipped.
std::vector<size_t> baseline_select(Strategy strategy, size_t pool_size,
                                    const Eigen::MatrixXd *probs,
                                    const Eigen::MatrixXd *penult, int budget_b,
                                    uint64_t seed,
                                    std::span<const size_t> excluded = {});

// Per-instance baseline scores, larger is more informative.
std::vector<double> baseline_scores(Strategy strategy,
                                    const Eigen::MatrixXd &probs,
                                    const Eigen::MatrixXd *penult);

}  // namespace relclust
