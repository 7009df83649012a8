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

#include "relclust/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "relclust/errors.hpp"

namespace relclust {

std::vector<PseudoAssignment> assign_pseudo_labels(const Eigen::MatrixXd &reps,
                                                   const KeyPointSet &keys) {
  if (keys.empty()) throw ContractError("pseudo-labeling needs at least one key point");
  const Eigen::Index n = reps.rows();
  std::vector<int> key_of_row(n, -1);
  for (size_t k = 0; k < keys.size(); ++k) {
    if (keys[k].row >= static_cast<size_t>(n)) throw ContractError("key row out of range");
    if (key_of_row[keys[k].row] < 0) key_of_row[keys[k].row] = static_cast<int>(k);
  }

  std::vector<PseudoAssignment> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    PseudoAssignment &a = out[i];
    a.row = static_cast<size_t>(i);
    if (key_of_row[i] >= 0) {
      a.key = static_cast<size_t>(key_of_row[i]);
      a.is_key = true;
      a.distance = 0.0;
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < keys.size(); ++k) {
        const double d2 = (reps.row(i) - reps.row(keys[k].row)).squaredNorm();
        if (d2 < best) {
          best = d2;
          a.key = k;
        }
      }
      a.distance = std::sqrt(best);
    }
    a.label = keys[a.key].relation;
    a.reliability = (a.is_key || a.distance < kMinAssignDistance)
                        ? kMaxReliability
                        : 1.0 / a.distance;
  }
  return out;
}

ReliabilityPartition partition_by_reliability(
    const std::vector<PseudoAssignment> &assignments, double theta_ce,
    double theta_bce) {
  if (!(theta_ce > 0 && theta_ce <= theta_bce && theta_bce <= 100))
    throw ContractError("need 0 < theta_ce <= theta_bce <= 100");
  const size_t n = assignments.size();
  ReliabilityPartition part;
  if (n == 0) return part;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double ra = assignments[a].reliability, rb = assignments[b].reliability;
    if (ra != rb) return ra > rb;
    return assignments[a].row < assignments[b].row;
  });
  auto take = [&](double theta, double &threshold) {
    size_t m = static_cast<size_t>(std::ceil(theta * n / 100.0 - 1e-9));
    m = std::clamp<size_t>(m, 1, n);
    threshold = assignments[order[m - 1]].reliability;
    std::vector<size_t> rows;
    for (size_t q = 0; q < n; ++q)
      if (q < m || assignments[order[q]].is_key) rows.push_back(assignments[order[q]].row);
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  part.high = take(theta_ce, part.r_h);
  part.moderate = take(theta_bce, part.r_m);
  return part;
}

}  // namespace relclust
