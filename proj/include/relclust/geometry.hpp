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
#include <span>
#include <vector>

#include <Eigen/Core>

namespace relclust {

// Squared Euclidean distances. Symmetric with a zero diagonal.
struct DistanceMatrix {
  Eigen::MatrixXd values;

  size_t n() const { return static_cast<size_t>(values.rows()); }
  double operator()(size_t i, size_t j) const { return values(i, j); }
};

struct GeometryProfile {
  double d_c = 0.0;
  std::vector<int> rho;
  std::vector<double> xi;
};

DistanceMatrix pairwise_sq_distances(const Eigen::MatrixXd &reps);

// Value at rank ceil(percentile/100 * M) among the M = N(N-1)/2 pair
// distances sorted from large to small.
double compute_threshold(const DistanceMatrix &d, double percentile);

// rho_i = sum over j != i of sign(d_c - D_ij), with sign(0) = 0.
std::vector<int> density(const DistanceMatrix &d, double d_c);

// j is denser than i when rho_j > rho_i, or they tie and j < i. Under this
// order exactly one point (the peak) has no denser neighbor.
inline bool denser(std::span<const int> rho, size_t j, size_t i) {
  return rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
}

// Distance to the nearest denser point; the peak gets its largest distance.
std::vector<double> sparsity(const DistanceMatrix &d, std::span<const int> rho);

// Shrinks xi to the squared distance of the closest existing key point.
// key_rows index rows of `reps`; those entries become 0.
std::vector<double> apply_keypoint_repulsion(std::span<const double> xi,
                                             const Eigen::MatrixXd &reps,
                                             std::span<const size_t> key_rows);

// d_c, rho and xi for one representation matrix.
GeometryProfile build_profile(const Eigen::MatrixXd &reps, double percentile);

// All of [0, n) when n <= max_n, else a seeded uniform sample of max_n
// distinct indices in ascending order.
std::vector<size_t> subsample(size_t n, size_t max_n, uint64_t seed);

}  // namespace relclust
