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

// Finite-difference checks of the learner's analytic gradients, shared by
// the unit tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "relclust/learner.hpp"

namespace gradcheck {

using relclust::Activation;
using relclust::Learner;
using relclust::LearnerConfig;
using relclust::PairSample;
using relclust::Params;

// Block order: proj_w, proj_b, enc_w, enc_b, dec_w, dec_b, cls_w, cls_b.
constexpr size_t kProjW = 0, kProjB = 1, kEncW = 2, kEncB = 3, kDecW = 4, kDecB = 5,
                 kClsW = 6, kClsB = 7;

struct SmallSetup {
  Learner learner;
  Eigen::MatrixXd x;
  std::vector<int> labels;
};

// Small random stack with every block perturbed away from its initial
// values, so no gradient is trivially zero.
inline SmallSetup random_setup(std::mt19937_64 &rng, Activation act) {
  std::uniform_int_distribution<int> dim(2, 5);
  LearnerConfig cfg;
  cfg.input_dim = size_t(dim(rng));
  cfg.proj_dim = dim(rng) + 1;
  cfg.low_dim = dim(rng) - 1;
  cfg.activation = act;
  cfg.sigma = 0.05 + 0.5 * std::uniform_real_distribution<double>()(rng);
  cfg.seed = rng();
  Learner l(cfg);
  const size_t c = size_t(dim(rng));
  l.reinit_classifier(c);
  std::normal_distribution<double> g(0.0, 0.6);
  for (auto block : l.params().blocks())
    for (double &v : block) v += g(rng);
  const int n = 2 + int(rng() % 4);
  Eigen::MatrixXd x(n, Eigen::Index(cfg.input_dim));
  for (int i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
  std::vector<int> labels(static_cast<size_t>(n));
  for (auto &y : labels) y = int(rng() % c);
  return {std::move(l), std::move(x), std::move(labels)};
}

inline bool blocks_zero(const Params &p, std::initializer_list<size_t> which) {
  const auto b = p.blocks();
  for (size_t i : which)
    for (double v : b[i])
      if (v != 0.0) return false;
  return true;
}

inline Params keep_blocks(Params p, std::initializer_list<size_t> keep) {
  auto b = p.blocks();
  for (size_t i = 0; i < b.size(); ++i)
    if (std::find(keep.begin(), keep.end(), i) == keep.end())
      for (double &v : b[i]) v = 0.0;
  return p;
}

struct Report {
  double worst = 0.0;        // largest relative gradient error
  double loss_gap = 0.0;     // largest |library loss - oracle loss|
  bool untouched_zero = true;  // blocks outside the loss got exactly zero
  int asymmetric = 0;        // contrastive only: cases where frozen targets mattered
};

inline Activation activation_for(int trial) {
  return trial % 2 ? Activation::kTanh : Activation::kLinear;
}

// The projection is a fixed target for the reconstruction loss, so only
// the autoencoder blocks are compared.
inline Report reconstruction(uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  Report r;
  for (int t = 0; t < trials; ++t) {
    auto s = random_setup(rng, activation_for(t));
    const auto act = s.learner.config().activation;
    const auto analytic = s.learner.reconstruction_loss(s.x);
    r.loss_gap = std::max(r.loss_gap, std::abs(analytic.loss - oracle::reconstruction_loss(
                                                                   s.learner.params(), act, s.x)));
    r.untouched_zero &= blocks_zero(analytic.grad, {kProjW, kProjB, kClsW, kClsB});
    const auto target = oracle::forward(s.learner.params(), act, s.x).proj;
    const auto numeric = oracle::numeric_gradient(s.learner.params(), [&](const Params &p) {
      return oracle::reconstruction_loss(p, act, s.x, &target);
    });
    const auto ae = {kEncW, kEncB, kDecW, kDecB};
    r.worst = std::max(r.worst, oracle::max_relative_error(keep_blocks(analytic.grad, ae),
                                                           keep_blocks(numeric, ae)));
  }
  return r;
}

inline Report cross_entropy(uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  Report r;
  for (int t = 0; t < trials; ++t) {
    auto s = random_setup(rng, activation_for(t));
    const auto act = s.learner.config().activation;
    const auto analytic = s.learner.ce_loss(s.x, s.labels);
    r.loss_gap = std::max(r.loss_gap, std::abs(analytic.loss - oracle::ce_loss(s.learner.params(),
                                                                               act, s.x, s.labels)));
    r.untouched_zero &= blocks_zero(analytic.grad, {kEncW, kEncB, kDecW, kDecB});
    const auto numeric = oracle::numeric_gradient(s.learner.params(), [&](const Params &p) {
      return oracle::ce_loss(p, act, s.x, s.labels);
    });
    r.worst = std::max(r.worst, oracle::max_relative_error(analytic.grad, numeric));
  }
  return r;
}

// Starred distributions are frozen at the current parameters. Letting them
// move too must give a different gradient whenever a same-label pair or an
// active hinge is present, which shows the constants are honored.
inline Report contrastive(uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  Report r;
  for (int t = 0; t < trials; ++t) {
    auto s = random_setup(rng, activation_for(t));
    const auto act = s.learner.config().activation;
    const double sigma = s.learner.config().sigma;
    std::vector<PairSample> pairs;
    const size_t n = size_t(s.x.rows());
    for (size_t a = 0; a < n; ++a)
      for (size_t b = a + 1; b < n; ++b) pairs.push_back({a, b, ((a + b + size_t(t)) % 2) == 0});
    const auto analytic = s.learner.contrastive_loss(s.x, pairs);
    const auto frozen = oracle::forward(s.learner.params(), act, s.x).probs;
    r.loss_gap = std::max(r.loss_gap,
                          std::abs(analytic.loss - oracle::contrastive_loss(s.learner.params(), act,
                                                                            s.x, pairs, sigma, frozen)));
    r.untouched_zero &= blocks_zero(analytic.grad, {kEncW, kEncB, kDecW, kDecB});
    const auto numeric = oracle::numeric_gradient(s.learner.params(), [&](const Params &p) {
      return oracle::contrastive_loss(p, act, s.x, pairs, sigma, frozen);
    });
    r.worst = std::max(r.worst, oracle::max_relative_error(analytic.grad, numeric));
    const auto unfrozen = oracle::numeric_gradient(s.learner.params(), [&](const Params &p) {
      const auto live = oracle::forward(p, act, s.x).probs;
      return oracle::contrastive_loss(p, act, s.x, pairs, sigma, live);
    });
    r.asymmetric += oracle::max_relative_error(analytic.grad, unfrozen) > 1e-2;
  }
  return r;
}

}  // namespace gradcheck
