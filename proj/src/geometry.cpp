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

#include "relclust/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "relclust/errors.hpp"

namespace relclust {

DistanceMatrix pairwise_sq_distances(const Eigen::MatrixXd &reps) {
  const Eigen::Index n = reps.rows();
  const Eigen::Index k = reps.cols();
  if (n < 2) throw ShapeError("need at least two points for a distance matrix");
  if (!reps.allFinite()) throw NumericError("non-finite representation");

  DistanceMatrix d{Eigen::MatrixXd::Zero(n, n)};
  // Plain accumulation in column order; no Gram-matrix shortcut, so the result
  // does not depend on vectorization or cancellation.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index m = 0; m < k; ++m) {
        const double diff = reps(i, m) - reps(j, m);
        s += diff * diff;
      }
      d.values(i, j) = s;
      d.values(j, i) = s;
    }
  }
  return d;
}

double compute_threshold(const DistanceMatrix &d, double percentile) {
  const size_t n = d.n();
  if (n < 2) throw ShapeError("threshold needs at least two points");
  if (!(percentile > 0.0 && percentile <= 100.0))
    throw ConfigError("percentile must lie in (0, 100]");
  std::vector<double> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) pairs.push_back(d(i, j));
  const double m = static_cast<double>(pairs.size());
  size_t rank = static_cast<size_t>(std::ceil(percentile * m / 100.0 - 1e-9));
  rank = std::clamp<size_t>(rank, 1, pairs.size());
  auto nth = pairs.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(pairs.begin(), nth, pairs.end(), std::greater<>());
  return *nth;
}

std::vector<int> density(const DistanceMatrix &d, double d_c) {
  const size_t n = d.n();
  std::vector<int> rho(n, 0);
  for (size_t i = 0; i < n; ++i) {
    int s = 0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double diff = d_c - d(i, j);
      s += (diff > 0) - (diff < 0);
    }
    rho[i] = s;
  }
  return rho;
}

std::vector<double> sparsity(const DistanceMatrix &d, std::span<const int> rho) {
  const size_t n = d.n();
  if (rho.size() != n) throw ShapeError("rho length does not match distances");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return denser(rho, a, b); });

  std::vector<double> xi(n, 0.0);
  const size_t peak = order[0];
  for (size_t j = 0; j < n; ++j) xi[peak] = std::max(xi[peak], d(peak, j));
  for (size_t pos = 1; pos < n; ++pos) {
    const size_t i = order[pos];
    double best = d(i, order[0]);
    for (size_t q = 1; q < pos; ++q) best = std::min(best, d(i, order[q]));
    xi[i] = best;
  }
  return xi;
}

std::vector<double> apply_keypoint_repulsion(std::span<const double> xi,
                                             const Eigen::MatrixXd &reps,
                                             std::span<const size_t> key_rows) {
  if (xi.size() != static_cast<size_t>(reps.rows()))
    throw ShapeError("xi length does not match representation rows");
  std::vector<double> out(xi.begin(), xi.end());
  for (size_t k : key_rows)
    if (k >= out.size()) throw ContractError("key row out of range");
  for (size_t i = 0; i < out.size(); ++i) {
    for (size_t k : key_rows) {
      double s = 0.0;
      for (Eigen::Index m = 0; m < reps.cols(); ++m) {
        const double diff = reps(i, m) - reps(k, m);
        s += diff * diff;
      }
      out[i] = std::min(out[i], s);
    }
  }
  for (size_t k : key_rows) out[k] = 0.0;
  return out;
}

GeometryProfile build_profile(const Eigen::MatrixXd &reps, double percentile) {
  const DistanceMatrix d = pairwise_sq_distances(reps);
  GeometryProfile p;
  p.d_c = compute_threshold(d, percentile);
  p.rho = density(d, p.d_c);
  p.xi = sparsity(d, p.rho);
  return p;
}

std::vector<size_t> subsample(size_t n, size_t max_n, uint64_t seed) {
  if (max_n < 2) throw ConfigError("subsample size must be >= 2");
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= max_n) return idx;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first max_n slots end up a uniform sample.
  for (size_t i = 0; i < max_n; ++i) {
    std::uniform_int_distribution<size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(max_n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace relclust
