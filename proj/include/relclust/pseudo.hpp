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
#include <string>
#include <vector>

#include <Eigen/Core>

namespace relclust {

// An actively labeled instance.
struct KeyPoint {
  size_t row = 0;  // row in the dataset
  int64_t id = 0;
  std::string relation;
  int iteration = 0;
};

using KeyPointSet = std::vector<KeyPoint>;

// Coincident points would have infinite reliability; clamp instead.
inline constexpr double kMinAssignDistance = 1e-12;
inline constexpr double kMaxReliability = 1e12;

struct PseudoAssignment {
  size_t row = 0;
  size_t key = 0;       // index into the KeyPointSet
  std::string label;
  double distance = 0;  // Euclidean, not squared
  double reliability = 0;
  bool is_key = false;
};

// Nearest key point for every row of `reps` (ties: smaller key index).
// Reliability is the reciprocal Euclidean distance.
std::vector<PseudoAssignment> assign_pseudo_labels(const Eigen::MatrixXd &reps,
                                                   const KeyPointSet &keys);

struct ReliabilityPartition {
  double r_h = 0.0;  // smallest reliability admitted to `high`
  double r_m = 0.0;
  std::vector<size_t> high;      // rows, ascending; trained with cross entropy
  std::vector<size_t> moderate;  // rows, ascending; superset of high
};

// `high` holds the theta_ce percent most reliable assignments, `moderate` the
// theta_bce percent; key points are in both regardless.
ReliabilityPartition partition_by_reliability(
    const std::vector<PseudoAssignment> &assignments, double theta_ce,
    double theta_bce);

}  // namespace relclust
