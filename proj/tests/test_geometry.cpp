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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "relclust/errors.hpp"
#include "relclust/geometry.hpp"

using namespace relclust;

namespace {

Eigen::MatrixXd line_points() {
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 10, 11;
  return x;
}

Eigen::MatrixXd random_matrix(std::mt19937_64 &rng, int n, int k) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) x(i, j) = g(rng);
  return x;
}

}  // namespace

TEST_CASE("line fixture: distances, threshold, density, sparsity") {
  const auto d = pairwise_sq_distances(line_points());
  CHECK(d(0, 1) == 1);
  CHECK(d(0, 3) == 100);
  CHECK(d(3, 4) == 1);
  const double dc = compute_threshold(d, 40);
  CHECK(dc == 81);
  const auto rho = density(d, dc);
  CHECK(rho == std::vector<int>{0, 1, 3, 1, -1});
  const auto xi = sparsity(d, rho);
  CHECK(xi == std::vector<double>{1, 1, 81, 64, 1});

  const auto oracle_d = oracle::sq_distances(line_points());
  CHECK(oracle::threshold(oracle_d, 40) == 81);
  CHECK(oracle::density(oracle_d, 81) == rho);
  CHECK(oracle::sparsity(oracle_d, rho) == xi);
}

TEST_CASE("repulsion against existing key points") {
  const auto x = line_points();
  const auto p = build_profile(x, 40);
  const std::vector<size_t> none;
  CHECK(apply_keypoint_repulsion(p.xi, x, none) == p.xi);
  const std::vector<size_t> keys{2};
  const auto shrunk = apply_keypoint_repulsion(p.xi, x, keys);
  CHECK(shrunk[3] == 64);
  CHECK(shrunk[0] == 1);
  CHECK(shrunk[2] == 0);
  for (size_t i = 0; i < shrunk.size(); ++i) CHECK(shrunk[i] <= p.xi[i]);
}

TEST_CASE("degenerate threshold and density cases") {
  Eigen::MatrixXd same = Eigen::MatrixXd::Constant(6, 3, 0.5);
  const auto d = pairwise_sq_distances(same);
  for (int p : {1, 40, 99}) CHECK(compute_threshold(d, p) == 0);
  for (int r : density(d, 1.0)) CHECK(r == 5);

  const auto dl = pairwise_sq_distances(line_points());
  CHECK(compute_threshold(dl, 99.999) == 1);

  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 3, 4;
  const auto p2 = build_profile(two, 40);
  CHECK(p2.xi == std::vector<double>{25, 25});

  CHECK_THROWS_AS(compute_threshold(pairwise_sq_distances(Eigen::MatrixXd::Zero(1, 2)), 40),
                  ShapeError);
  Eigen::MatrixXd bad = line_points();
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(pairwise_sq_distances(bad), NumericError);
}

TEST_CASE("random fixtures agree with the brute-force oracles") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + int(rng() % 60);
    const auto x = random_matrix(rng, n, 5);
    const auto d = pairwise_sq_distances(x);
    const auto od = oracle::sq_distances(x);
    CHECK((d.values - od).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(d.values == d.values.transpose());
    CHECK(d.values.diagonal().isZero(0));
    const int pct = 1 + int(rng() % 99);
    const double dc = compute_threshold(d, pct);
    CHECK(dc == oracle::threshold(d.values, pct));
    const auto rho = density(d, dc);
    CHECK(rho == oracle::density(d.values, dc));
    CHECK(sparsity(d, rho) == oracle::sparsity(d.values, rho));
  }
}

TEST_CASE("density ranking equals within-threshold count ranking") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + int(rng() % 30);
    const auto x = random_matrix(rng, n, 3);
    const auto d = pairwise_sq_distances(x);
    const double dc = compute_threshold(d, 40);
    const auto rho = density(d, dc);
    std::vector<int> within(size_t(n), 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && d(size_t(i), size_t(j)) < dc) ++within[size_t(i)];
    // rho_i = 2 * within_i - (N - 1) + ties_i with ties_i in {0, 1}, so a
    // strictly larger count always means a strictly larger density.
    bool monotone = true;
    for (size_t i = 0; i < size_t(n); ++i)
      for (size_t j = 0; j < size_t(n); ++j)
        if (within[i] > within[j] && !(rho[i] > rho[j])) monotone = false;
    CHECK(monotone);
  }
}

TEST_CASE("exactly one peak and it is the sparsest point") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = random_matrix(rng, 40, 4);
    const auto p = build_profile(x, 40);
    size_t peaks = 0, peak = 0;
    for (size_t i = 0; i < 40; ++i) {
      bool has_denser = false;
      for (size_t j = 0; j < 40; ++j)
        if (j != i && denser(p.rho, j, i)) has_denser = true;
      if (!has_denser) {
        ++peaks;
        peak = i;
      }
    }
    CHECK(peaks == 1);
    for (size_t i = 0; i < 40; ++i) {
      CHECK(p.xi[i] >= 0);
      CHECK(p.xi[peak] >= p.xi[i]);
    }
  }
}

TEST_CASE("geometry is deterministic") {
  std::mt19937_64 rng(14);
  const auto x = random_matrix(rng, 50, 6);
  const auto a = build_profile(x, 40);
  const auto b = build_profile(x, 40);
  CHECK(a.d_c == b.d_c);
  CHECK(a.rho == b.rho);
  CHECK(a.xi == b.xi);
}

TEST_CASE("subsample") {
  const auto all = subsample(100, 200, 1);
  REQUIRE(all.size() == 100);
  for (size_t i = 0; i < 100; ++i) CHECK(all[i] == i);

  const auto s = subsample(1000, 200, 7);
  CHECK(s.size() == 200);
  CHECK(std::set<size_t>(s.begin(), s.end()).size() == 200);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(s.back() < 1000);
  CHECK(subsample(1000, 200, 7) == s);

  std::set<std::vector<size_t>> distinct;
  for (uint64_t seed = 0; seed < 10; ++seed) distinct.insert(subsample(1000, 200, seed));
  CHECK(distinct.size() == 10);
}
