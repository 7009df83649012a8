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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gradient_cases.hpp"
#include "oracles.hpp"
#include "relclust/dataset.hpp"
#include "relclust/errors.hpp"
#include "relclust/geometry.hpp"
#include "relclust/learner.hpp"
#include "relclust/metrics.hpp"
#include "relclust/oracle.hpp"
#include "relclust/pseudo.hpp"
#include "relclust/selection.hpp"

using namespace relclust;

constexpr double kGradTol = 1e-4;

TEST_CASE("reconstruction gradient matches finite differences") {
  const auto r = gradcheck::reconstruction(41, 50);
  MESSAGE("worst relative error " << r.worst);
  CHECK(r.worst < kGradTol);
  CHECK(r.loss_gap < 1e-12);
  CHECK(r.untouched_zero);
}

TEST_CASE("cross-entropy gradient matches finite differences") {
  const auto r = gradcheck::cross_entropy(42, 50);
  MESSAGE("worst relative error " << r.worst);
  CHECK(r.worst < kGradTol);
  CHECK(r.loss_gap < 1e-12);
  CHECK(r.untouched_zero);
}

TEST_CASE("contrastive gradient matches finite differences with frozen targets") {
  const auto r = gradcheck::contrastive(43, 50);
  MESSAGE("worst relative error " << r.worst << ", asymmetric cases " << r.asymmetric);
  CHECK(r.worst < kGradTol);
  CHECK(r.loss_gap < 1e-12);
  CHECK(r.untouched_zero);
  CHECK(r.asymmetric > 25);
}

TEST_CASE("pair loss arithmetic") {
  CHECK(hinge(3.0, 2.0) == 0.0);
  CHECK(hinge(0.5, 2.0) == 1.5);
  CHECK(hinge(2.0, 2.0) == 0.0);
  for (double x : {-1.0, 0.0, 1.0, 5.0}) CHECK(hinge(x, 2.0) >= 0.0);
  CHECK(pair_loss_from_divergences(3.0, 0.5, false, 2.0) == 1.5);
  CHECK(pair_loss_from_divergences(0.0, 0.0, false, 2.0) == 4.0);
  CHECK(pair_loss_from_divergences(0.0, 0.0, true, 2.0) == 0.0);

  const std::vector<double> p{0.2, 0.3, 0.5}, q{0.4, 0.4, 0.2}, bad{0.5, 0.6, 0.1};
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(p, q) > 0.0);
  CHECK(kl_divergence(p, q) == doctest::Approx(oracle::kl(p, q)));
  CHECK_THROWS_AS(kl_divergence(p, bad), ContractError);
}

TEST_CASE("equal outputs give zero same-pair loss and 2 sigma different-pair loss") {
  LearnerConfig cfg;
  cfg.input_dim = 3;
  cfg.proj_dim = 4;
  cfg.low_dim = 2;
  Learner l(cfg);
  l.reinit_classifier(3);
  Eigen::MatrixXd x(2, 3);
  x << 0.1, 0.2, 0.3, 0.1, 0.2, 0.3;
  const std::vector<PairSample> same{{0, 1, true}}, diff{{0, 1, false}};
  CHECK(l.contrastive_loss(x, same).loss == doctest::Approx(0.0));
  CHECK(l.contrastive_loss(x, diff).loss == doctest::Approx(4.0));
  x(1, 0) = 2.0;
  CHECK(l.contrastive_loss(x, same).loss > 0.0);
}

TEST_CASE("identity stack reconstructs its input") {
  LearnerConfig cfg;
  cfg.input_dim = 4;
  cfg.proj_dim = 4;
  cfg.low_dim = 4;
  cfg.activation = Activation::kLinear;
  Learner l(cfg);
  auto &p = l.params();
  p.proj_w.setIdentity();
  p.enc_w.setIdentity();
  p.dec_w.setIdentity();
  p.proj_b.setZero();
  p.enc_b.setZero();
  p.dec_b.setZero();
  Eigen::VectorXd h(4);
  h << 1.5, -2, 0.25, 3;
  const auto e = l.encode(h);
  CHECK((e.recon.row(0).transpose() - h).norm() == 0.0);
  CHECK(e.low.cols() == 4);
  Eigen::MatrixXd x = h.transpose();
  const auto r = l.reconstruction_loss(x);
  CHECK(r.loss == 0.0);
  for (auto b : r.grad.blocks())
    for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("encode shapes, determinism and dimension checks") {
  LearnerConfig cfg;
  cfg.input_dim = 6;
  cfg.proj_dim = 10;
  cfg.low_dim = 3;
  Learner l(cfg);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 6);
  const auto a = l.encode(x), b = l.encode(x);
  CHECK(a.low.rows() == 7);
  CHECK(a.low.cols() == 3);
  CHECK(a.low == b.low);
  CHECK(a.recon == b.recon);
  CHECK_THROWS_AS(l.encode(Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 5))), ShapeError);
  CHECK_THROWS_AS(l.class_probs(x), ContractError);
}

TEST_CASE("uniform classifier gives ln C") {
  LearnerConfig cfg;
  cfg.input_dim = 3;
  cfg.proj_dim = 5;
  cfg.low_dim = 2;
  Learner l(cfg);
  l.reinit_classifier(7);
  l.params().cls_w.setZero();
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  const std::vector<int> y{0, 3, 6, 2};
  CHECK(l.ce_loss(x, y).loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  const std::vector<int> out{0, 7, 1, 1};
  CHECK_THROWS_AS(l.ce_loss(x, out), ContractError);

  // A confident classifier drives the loss toward zero.
  l.params().cls_b.setZero();
  l.params().cls_b(0) = 50;
  const std::vector<int> zeros{0, 0, 0, 0};
  CHECK(l.ce_loss(x, zeros).loss < 1e-12);
}

TEST_CASE("classifier reinitialization") {
  LearnerConfig cfg;
  cfg.input_dim = 4;
  cfg.proj_dim = 6;
  cfg.low_dim = 2;
  Learner l(cfg);
  l.reinit_classifier(3);
  const Params before = l.params();
  l.reinit_classifier(3);
  CHECK(l.params().cls_w == before.cls_w);
  l.reinit_classifier(5);
  CHECK(l.num_classes() == 5);
  CHECK(l.params().proj_w == before.proj_w);
  CHECK(l.params().proj_b == before.proj_b);
  CHECK(l.params().enc_w == before.enc_w);
  CHECK(l.params().dec_w == before.dec_w);
  const auto probs = l.class_probs(Eigen::MatrixXd::Random(5, 4));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) CHECK(std::abs(probs.row(i).sum() - 1) < 1e-6);
  CHECK_THROWS_AS(l.reinit_classifier(2), ContractError);
}

namespace {

struct TrainFixture {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  std::vector<size_t> high, moderate;
};

TrainFixture train_fixture(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  TrainFixture f;
  f.x.resize(60, 5);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 5; ++j) f.x(i, j) = g(rng) + (j == i % 3 ? 3.0 : 0.0);
  for (size_t i = 0; i < 60; ++i) {
    f.labels.push_back(int(i % 3));
    f.moderate.push_back(i);
    if (i % 2 == 0) f.high.push_back(i);
  }
  return f;
}

LearnerConfig train_config() {
  LearnerConfig cfg;
  cfg.input_dim = 5;
  cfg.proj_dim = 16;
  cfg.low_dim = 4;
  cfg.batch = 20;
  cfg.pairs_per_batch = 8;
  cfg.epochs = 3;
  cfg.lr = 1e-3;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("training is reproducible and zero learning rate freezes the state") {
  const auto f = train_fixture(1);
  Learner a(train_config()), b(train_config());
  a.reinit_classifier(3);
  b.reinit_classifier(3);
  const auto la = a.train_iteration(f.x, f.labels, f.high, f.moderate);
  const auto lb = b.train_iteration(f.x, f.labels, f.high, f.moderate);
  CHECK(la == lb);
  CHECK(a == b);
  CHECK(la.size() == 3);
  CHECK(la[0].bce_batches > 0);
  CHECK(a.params().all_finite());

  auto cfg = train_config();
  cfg.lr = 0;
  Learner z(cfg);
  z.reinit_classifier(3);
  const Params before = z.params();
  z.train_iteration(f.x, f.labels, f.high, f.moderate);
  for (size_t i = 0; i < Params::kNumBlocks; ++i) {
    const auto pb = before.blocks()[i];
    const auto zb = z.params().blocks()[i];
    CHECK(std::equal(pb.begin(), pb.end(), zb.begin(), zb.end()));
  }
}

TEST_CASE("empty high tier skips cross entropy") {
  const auto f = train_fixture(2);
  Learner l(train_config());
  l.reinit_classifier(3);
  const std::vector<size_t> none;
  const auto loss = l.train_iteration(f.x, f.labels, none, f.moderate);
  for (const auto &e : loss) CHECK(e.ce_batches == 0);
}

TEST_CASE("reconstruction loss falls on a fixed batch") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(50, 8);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 8; ++j) x(i, j) = g(rng);
  LearnerConfig cfg;
  cfg.input_dim = 8;
  cfg.proj_dim = 32;
  cfg.low_dim = 4;
  cfg.batch = 50;
  cfg.lr = 1e-4;
  Learner l(cfg);
  const double start = l.reconstruction_loss(x).loss;
  l.pretrain_autoencoder(x, 50);
  const double end = l.reconstruction_loss(x).loss;
  MESSAGE("reconstruction " << start << " -> " << end);
  CHECK(end < start);
}

TEST_CASE("save and load round trip") {
  const auto f = train_fixture(3);
  Learner l(train_config());
  l.reinit_classifier(3);
  l.train_iteration(f.x, f.labels, f.high, f.moderate);
  std::stringstream buf;
  l.save(buf);
  Learner back = Learner::load(buf);
  CHECK(back == l);
  // The restored optimizer and sampler continue the same trajectory.
  const auto la = l.train_iteration(f.x, f.labels, f.high, f.moderate);
  const auto lb = back.train_iteration(f.x, f.labels, f.high, f.moderate);
  CHECK(la == lb);
  CHECK(back == l);

  std::stringstream junk("not a checkpoint at all");
  CHECK_THROWS_AS(Learner::load(junk), ParseError);
}

TEST_CASE("one training iteration does not hurt a separable mixture") {
  int held = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SynthSpec spec;
    spec.num_clusters = 3;
    spec.head_size = 60;
    spec.tail_decay = 0;
    spec.dim = 16;
    spec.cluster_spread = 1.0;
    spec.center_spread = 2.0;
    spec.seed = seed;
    const Dataset ds = generate_synthetic(spec);
    GoldOracle gold(ds);
    std::vector<std::string> gold_names;
    for (size_t i = 0; i < ds.size(); ++i) gold_names.push_back(*gold.label_of(i));
    const auto x = InputScaling::fit(ds.matrix()).apply(ds.matrix());

    LearnerConfig cfg;
    cfg.input_dim = ds.dim();
    cfg.proj_dim = 64;
    cfg.low_dim = 8;
    cfg.lr = 1e-3;
    cfg.seed = seed;
    Learner l(cfg);

    const auto low = l.encode(x).low;
    const auto round = select_key_points(build_profile(low, 40), 3, 1.2);
    KeyPointSet keys;
    std::vector<std::string> names;
    for (size_t r : round.chosen) {
      keys.push_back({r, ds[r].id, gold_names[r], 1});
      if (std::find(names.begin(), names.end(), gold_names[r]) == names.end())
        names.push_back(gold_names[r]);
    }
    auto score = [&](const Eigen::MatrixXd &reps) {
      std::vector<std::string> pred;
      for (const auto &a : assign_pseudo_labels(reps, keys)) pred.push_back(a.label);
      return b_cubed(pred, gold_names).f1;
    };
    const double before = score(low);
    const auto assign = assign_pseudo_labels(low, keys);
    const auto part = partition_by_reliability(assign, 20, 60);
    std::vector<int> labels;
    for (const auto &a : assign)
      labels.push_back(int(std::find(names.begin(), names.end(), a.label) - names.begin()));
    l.reinit_classifier(names.size());
    l.train_iteration(x, labels, part.high, part.moderate);
    const double after = score(l.encode(x).low);
    MESSAGE("seed " << seed << ": " << before << " -> " << after);
    held += after >= before;
  }
  CHECK(held >= 3);
}
