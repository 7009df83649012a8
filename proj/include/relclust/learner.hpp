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
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relclust/config.hpp"

namespace relclust {

struct LearnerConfig {
  size_t input_dim = 0;
  int proj_dim = 256;
  int low_dim = 32;
  Activation activation = Activation::kTanh;
  double sigma = 2.0;
  double lr = 1e-4;
  int batch = 100;
  int pairs_per_batch = 64;
  int epochs = 5;
  double w_rec = 1.0;
  double w_ce = 1.0;
  double w_bce = 1.0;
  uint64_t seed = 1;

  static LearnerConfig from_run(const RunConfig &run, size_t input_dim);
};

// Centering plus one global scale, so inputs reach the projection with unit
// mean-square entries. Distances shrink uniformly; their ratios are unchanged.
struct InputScaling {
  Eigen::RowVectorXd mean;
  double scale = 1.0;

  static InputScaling fit(const Eigen::MatrixXd &x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const;
};

// Weights of the stack: projection (input -> proj), autoencoder
// (proj -> low -> proj) and softmax classifier (proj -> C).
struct Params {
  Eigen::MatrixXd proj_w;  // proj_dim x input_dim
  Eigen::VectorXd proj_b;
  Eigen::MatrixXd enc_w;   // low_dim x proj_dim
  Eigen::VectorXd enc_b;
  Eigen::MatrixXd dec_w;   // proj_dim x low_dim
  Eigen::VectorXd dec_b;
  Eigen::MatrixXd cls_w;   // C x proj_dim
  Eigen::VectorXd cls_b;

  static constexpr size_t kNumBlocks = 8;
  static const char *block_name(size_t i);
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  Params zeros_like() const;
  bool all_finite() const;
};

// Rows are instances.
struct Encoded {
  Eigen::MatrixXd low;    // clustering space, N x low_dim
  Eigen::MatrixXd proj;   // projected input, N x proj_dim
  Eigen::MatrixXd recon;  // decoder output, N x proj_dim
};

struct LossGrad {
  double loss = 0.0;
  Params grad;
};

struct PairSample {
  size_t a = 0;  // rows of the batch matrix
  size_t b = 0;
  bool same = false;
};

struct EpochLoss {
  double rec = 0.0;
  double ce = 0.0;
  double bce = 0.0;
  int batches = 0;
  int ce_batches = 0;
  int bce_batches = 0;
  bool operator==(const EpochLoss &) const = default;
};

// KL(p || q) for probability vectors; ContractError unless both sum to 1.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// max(0, sigma - x).
inline double hinge(double x, double sigma) { return x < sigma ? sigma - x : 0.0; }

// Loss of one pair given its two divergences KL(P*_i || P_j), KL(P_i || P*_j).
inline double pair_loss_from_divergences(double kl_ij, double kl_ji, bool same,
                                         double sigma) {
  return same ? kl_ij + kl_ji : hinge(kl_ij, sigma) + hinge(kl_ji, sigma);
}

class Learner {
 public:
  explicit Learner(const LearnerConfig &cfg);

  const LearnerConfig &config() const { return cfg_; }
  LearnerConfig &mutable_config() { return cfg_; }
  Params &params() { return params_; }
  const Params &params() const { return params_; }
  size_t num_classes() const { return static_cast<size_t>(params_.cls_w.rows()); }

  Encoded encode(const Eigen::MatrixXd &x) const;
  Encoded encode(const Eigen::VectorXd &h_ent) const;
  // Softmax output, N x C. Needs at least one class.
  Eigen::MatrixXd class_probs(const Eigen::MatrixXd &x) const;

  // Mean squared error between the projection and its reconstruction.
  // Gradient covers the autoencoder only.
  LossGrad reconstruction_loss(const Eigen::MatrixXd &x) const;
  // Mean cross entropy of the classifier against `labels` (one per row).
  // Gradient covers classifier and projection.
  LossGrad ce_loss(const Eigen::MatrixXd &x, std::span<const int> labels) const;
  // Mean binary contrastive loss over `pairs`. Same-label pairs pay
  // KL(P*_a || P_b) + KL(P_a || P*_b), different-label pairs the hinged
  // versions; starred distributions are held constant.
  LossGrad contrastive_loss(const Eigen::MatrixXd &x,
                            std::span<const PairSample> pairs) const;

  // Reconstruction-only epochs; trains the autoencoder before labels exist.
  std::vector<EpochLoss> pretrain_autoencoder(const Eigen::MatrixXd &x, int epochs);

  // `labels[i]` is the pseudo-label class of row i (or -1). Reconstruction
  // runs on every batch member, cross entropy on `high` members and the
  // contrastive loss on sampled pairs of `moderate` members.
  std::vector<EpochLoss> train_iteration(const Eigen::MatrixXd &x,
                                         std::span<const int> labels,
                                         std::span<const size_t> high,
                                         std::span<const size_t> moderate);

  // Fresh classifier with `new_c` outputs; no-op when the size is unchanged.
  void reinit_classifier(size_t new_c);

  void save(std::ostream &out) const;
  static Learner load(std::istream &in);

  bool operator==(const Learner &other) const;

 private:
  void adam_step(const Params &grad);
  std::vector<EpochLoss> run_epochs(const Eigen::MatrixXd &x, std::span<const int> labels,
                                    std::span<const size_t> high,
                                    std::span<const size_t> moderate, int epochs,
                                    bool reconstruction_only);
  std::vector<PairSample> sample_pairs(std::span<const size_t> members,
                                       std::span<const int> batch_labels);

  LearnerConfig cfg_;
  Params params_;
  Params adam_m_;
  Params adam_v_;
  int64_t adam_step_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace relclust
