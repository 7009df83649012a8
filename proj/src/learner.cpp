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

#include "relclust/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/QR>

#include "relclust/errors.hpp"

namespace relclust {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LearnerConfig LearnerConfig::from_run(const RunConfig &run, size_t input_dim) {
  LearnerConfig c;
  c.input_dim = input_dim;
  c.proj_dim = run.proj_dim;
  c.low_dim = run.low_dim;
  c.activation = run.activation;
  c.sigma = run.sigma;
  c.lr = run.lr;
  c.batch = run.batch;
  c.pairs_per_batch = run.pairs_per_batch;
  c.epochs = run.epochs_per_iter;
  c.w_rec = run.w_rec;
  c.w_ce = run.w_ce;
  c.w_bce = run.w_bce;
  c.seed = run.seed;
  return c;
}

InputScaling InputScaling::fit(const MatrixXd &x) {
  if (x.rows() == 0 || x.cols() == 0) throw ShapeError("cannot fit scaling on an empty matrix");
  InputScaling s;
  s.mean = x.colwise().mean();
  const double ms = (x.rowwise() - s.mean).squaredNorm() / double(x.size());
  s.scale = ms > 0 ? 1.0 / std::sqrt(ms) : 1.0;
  return s;
}

MatrixXd InputScaling::apply(const MatrixXd &x) const {
  if (x.cols() != mean.size()) throw ShapeError("scaling fitted for a different dimension");
  return (x.rowwise() - mean) * scale;
}

const char *Params::block_name(size_t i) {
  static const char *names[kNumBlocks] = {"proj_w", "proj_b", "enc_w", "enc_b",
                                          "dec_w",  "dec_b",  "cls_w", "cls_b"};
  return names[i];
}

std::vector<std::span<double>> Params::blocks() {
  return {{proj_w.data(), size_t(proj_w.size())}, {proj_b.data(), size_t(proj_b.size())},
          {enc_w.data(), size_t(enc_w.size())},   {enc_b.data(), size_t(enc_b.size())},
          {dec_w.data(), size_t(dec_w.size())},   {dec_b.data(), size_t(dec_b.size())},
          {cls_w.data(), size_t(cls_w.size())},   {cls_b.data(), size_t(cls_b.size())}};
}

std::vector<std::span<const double>> Params::blocks() const {
  auto mut = const_cast<Params *>(this)->blocks();
  return {mut.begin(), mut.end()};
}

Params Params::zeros_like() const {
  Params z;
  z.proj_w = MatrixXd::Zero(proj_w.rows(), proj_w.cols());
  z.proj_b = VectorXd::Zero(proj_b.size());
  z.enc_w = MatrixXd::Zero(enc_w.rows(), enc_w.cols());
  z.enc_b = VectorXd::Zero(enc_b.size());
  z.dec_w = MatrixXd::Zero(dec_w.rows(), dec_w.cols());
  z.dec_b = VectorXd::Zero(dec_b.size());
  z.cls_w = MatrixXd::Zero(cls_w.rows(), cls_w.cols());
  z.cls_b = VectorXd::Zero(cls_b.size());
  return z;
}

bool Params::all_finite() const {
  for (auto b : blocks())
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

namespace {

void add_scaled(Params &acc, const Params &g, double scale) {
  auto a = acc.blocks();
  auto b = g.blocks();
  for (size_t k = 0; k < a.size(); ++k)
    for (size_t i = 0; i < a[k].size(); ++i) a[k][i] += scale * b[k][i];
}

MatrixXd activate(const MatrixXd &pre, Activation act) {
  return act == Activation::kTanh ? MatrixXd(pre.array().tanh()) : pre;
}

// d proj / d pre, elementwise.
MatrixXd activation_slope(const MatrixXd &proj, Activation act) {
  if (act == Activation::kLinear) return MatrixXd::Ones(proj.rows(), proj.cols());
  return (1.0 - proj.array().square()).matrix();
}

MatrixXd affine(const MatrixXd &x, const MatrixXd &w, const VectorXd &b) {
  MatrixXd out = x * w.transpose();
  out.rowwise() += b.transpose();
  return out;
}

struct Head {
  MatrixXd proj;
  MatrixXd logits;
  MatrixXd log_probs;
  MatrixXd probs;
};

Head forward_head(const Params &p, Activation act, const MatrixXd &x) {
  Head h;
  h.proj = activate(affine(x, p.proj_w, p.proj_b), act);
  h.logits = affine(h.proj, p.cls_w, p.cls_b);
  const Eigen::VectorXd mx = h.logits.rowwise().maxCoeff();
  h.log_probs = h.logits.colwise() - mx;
  const Eigen::VectorXd lse = h.log_probs.array().exp().rowwise().sum().log().matrix();
  h.log_probs.colwise() -= lse;
  h.probs = h.log_probs.array().exp().matrix();
  return h;
}

// Gradients of the classifier and projection given dL/dlogits.
void backprop_head(const Params &p, Activation act, const MatrixXd &x, const Head &h,
                   const MatrixXd &dlogits, Params &grad) {
  grad.cls_w += dlogits.transpose() * h.proj;
  grad.cls_b += dlogits.colwise().sum().transpose();
  const MatrixXd dpre =
      ((dlogits * p.cls_w).array() * activation_slope(h.proj, act).array()).matrix();
  grad.proj_w += dpre.transpose() * x;
  grad.proj_b += dpre.colwise().sum().transpose();
}

void check_input(const MatrixXd &x, size_t dim) {
  if (static_cast<size_t>(x.cols()) != dim)
    throw ShapeError("input has " + std::to_string(x.cols()) + " columns, expected " +
                     std::to_string(dim));
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw ContractError("KL needs equal, non-empty supports");
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6)
    throw ContractError("KL arguments must be normalized distributions");
  double kl = 0.0;
  for (size_t c = 0; c < p.size(); ++c) {
    if (p[c] <= 0) continue;
    if (q[c] <= 0) return std::numeric_limits<double>::infinity();
    kl += p[c] * (std::log(p[c]) - std::log(q[c]));
  }
  return kl;
}

Learner::Learner(const LearnerConfig &cfg) : cfg_(cfg), rng_(cfg.seed) {
  if (cfg_.input_dim == 0 || cfg_.proj_dim < 1 || cfg_.low_dim < 1)
    throw ConfigError("learner layer sizes must be positive");
  if (!(cfg_.sigma > 0)) throw ConfigError("sigma must be positive");
  if (cfg_.lr < 0) throw ConfigError("learning rate must be non-negative");
  const auto d = static_cast<Eigen::Index>(cfg_.input_dim);
  const Eigen::Index dp = cfg_.proj_dim, dl = cfg_.low_dim;
  std::normal_distribution<double> unit(0.0, 1.0);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols, double fan_in) {
    MatrixXd m(rows, cols);
    const double scale = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * unit(rng_);
    return m;
  };
  params_.proj_w = gaussian(dp, d, double(d));
  params_.proj_b = VectorXd::Zero(dp);
  // Tied orthonormal start: the decoder is the encoder's transpose, so the
  // untrained low space is an orthogonal projection of the projected input
  // and reconstruction training refines that subspace instead of first
  // collapsing a random encoder/decoder product.
  const bool narrow = dl <= dp;
  const MatrixXd g = gaussian(narrow ? dp : dl, narrow ? dl : dp, 1.0);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ() *
                     MatrixXd::Identity(g.rows(), g.cols());
  params_.enc_w = narrow ? MatrixXd(q.transpose()) : q;
  params_.enc_b = VectorXd::Zero(dl);
  params_.dec_w = params_.enc_w.transpose();
  params_.dec_b = VectorXd::Zero(dp);
  params_.cls_w = MatrixXd::Zero(0, dp);
  params_.cls_b = VectorXd::Zero(0);
  adam_m_ = params_.zeros_like();
  adam_v_ = params_.zeros_like();
}

Encoded Learner::encode(const MatrixXd &x) const {
  check_input(x, cfg_.input_dim);
  Encoded e;
  e.proj = activate(affine(x, params_.proj_w, params_.proj_b), cfg_.activation);
  e.low = affine(e.proj, params_.enc_w, params_.enc_b);
  e.recon = affine(e.low, params_.dec_w, params_.dec_b);
  return e;
}

Encoded Learner::encode(const VectorXd &h_ent) const {
  return encode(MatrixXd(h_ent.transpose()));
}

MatrixXd Learner::class_probs(const MatrixXd &x) const {
  check_input(x, cfg_.input_dim);
  if (num_classes() == 0) throw ContractError("classifier has no classes yet");
  return forward_head(params_, cfg_.activation, x).probs;
}

LossGrad Learner::reconstruction_loss(const MatrixXd &x) const {
  check_input(x, cfg_.input_dim);
  if (x.rows() == 0) throw ContractError("empty reconstruction batch");
  const Encoded e = encode(x);
  const MatrixXd diff = e.recon - e.proj;
  const double denom = double(diff.rows()) * double(diff.cols());
  LossGrad out{diff.squaredNorm() / denom, params_.zeros_like()};
  const MatrixXd d_recon = (2.0 / denom) * diff;
  out.grad.dec_w = d_recon.transpose() * e.low;
  out.grad.dec_b = d_recon.colwise().sum().transpose();
  const MatrixXd d_low = d_recon * params_.dec_w;
  out.grad.enc_w = d_low.transpose() * e.proj;
  out.grad.enc_b = d_low.colwise().sum().transpose();
  return out;
}

LossGrad Learner::ce_loss(const MatrixXd &x, std::span<const int> labels) const {
  check_input(x, cfg_.input_dim);
  const auto n = x.rows();
  if (n == 0) throw ContractError("empty cross-entropy batch");
  if (static_cast<size_t>(n) != labels.size()) throw ShapeError("one label per row required");
  const size_t c = num_classes();
  for (int y : labels)
    if (y < 0 || static_cast<size_t>(y) >= c)
      throw ContractError("label " + std::to_string(y) + " outside the " +
                          std::to_string(c) + " known classes");
  const Head h = forward_head(params_, cfg_.activation, x);
  LossGrad out{0.0, params_.zeros_like()};
  MatrixXd dlogits = h.probs;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.loss -= h.log_probs(i, labels[i]);
    dlogits(i, labels[i]) -= 1.0;
  }
  out.loss /= double(n);
  dlogits /= double(n);
  backprop_head(params_, cfg_.activation, x, h, dlogits, out.grad);
  return out;
}

LossGrad Learner::contrastive_loss(const MatrixXd &x,
                                   std::span<const PairSample> pairs) const {
  check_input(x, cfg_.input_dim);
  if (num_classes() == 0) throw ContractError("classifier has no classes yet");
  LossGrad out{0.0, params_.zeros_like()};
  if (pairs.empty()) return out;
  for (const auto &pr : pairs)
    if (pr.a >= size_t(x.rows()) || pr.b >= size_t(x.rows()))
      throw ContractError("pair index outside the batch");
  const Head h = forward_head(params_, cfg_.activation, x);
  for (Eigen::Index i = 0; i < h.probs.rows(); ++i)
    if (std::abs(h.probs.row(i).sum() - 1.0) > 1e-6)
      throw ContractError("classifier output is not normalized");

  MatrixXd dlogits = MatrixXd::Zero(h.probs.rows(), h.probs.cols());
  const double inv = 1.0 / double(pairs.size());
  for (const auto &pr : pairs) {
    const auto pa = h.probs.row(pr.a);
    const auto pb = h.probs.row(pr.b);
    const Eigen::RowVectorXd log_ratio = h.log_probs.row(pr.a) - h.log_probs.row(pr.b);
    // KL(P*_a || P_b) and KL(P_a || P*_b) share a value; the star only decides
    // which side receives gradient.
    const double kl = pa.dot(log_ratio);
    out.loss += inv * pair_loss_from_divergences(kl, kl, pr.same, cfg_.sigma);
    const double slope = pr.same ? 1.0 : (kl < cfg_.sigma ? -1.0 : 0.0);
    if (slope == 0.0) continue;
    // d KL(P*_a || P_b) / d logits_b
    dlogits.row(pr.b) += (inv * slope) * (pb - pa);
    // d KL(P_a || P*_b) / d logits_a
    dlogits.row(pr.a) +=
        (inv * slope) * (pa.array() * (log_ratio.array() - kl)).matrix();
  }
  backprop_head(params_, cfg_.activation, x, h, dlogits, out.grad);
  return out;
}

void Learner::adam_step(const Params &grad) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++adam_step_;
  const double c1 = 1.0 - std::pow(kBeta1, double(adam_step_));
  const double c2 = 1.0 - std::pow(kBeta2, double(adam_step_));
  auto p = params_.blocks();
  auto m = adam_m_.blocks();
  auto v = adam_v_.blocks();
  auto g = grad.blocks();
  for (size_t k = 0; k < p.size(); ++k) {
    for (size_t i = 0; i < p[k].size(); ++i) {
      m[k][i] = kBeta1 * m[k][i] + (1.0 - kBeta1) * g[k][i];
      v[k][i] = kBeta2 * v[k][i] + (1.0 - kBeta2) * g[k][i] * g[k][i];
      p[k][i] -= cfg_.lr * (m[k][i] / c1) / (std::sqrt(v[k][i] / c2) + kEps);
    }
  }
  if (!params_.all_finite()) throw NumericError("training produced non-finite parameters");
}

std::vector<PairSample> Learner::sample_pairs(std::span<const size_t> members,
                                              std::span<const int> batch_labels) {
  std::vector<PairSample> same, diff;
  for (size_t i = 0; i < members.size(); ++i)
    for (size_t j = i + 1; j < members.size(); ++j) {
      const size_t a = members[i], b = members[j];
      (batch_labels[a] == batch_labels[b] ? same : diff).push_back({a, b, false});
    }
  for (auto &s : same) s.same = true;

  const size_t want = static_cast<size_t>(cfg_.pairs_per_batch);
  size_t n_same = std::min(same.size(), want / 2 + want % 2);
  size_t n_diff = std::min(diff.size(), want - n_same);
  n_same = std::min(same.size(), want - n_diff);

  auto draw = [&](std::vector<PairSample> &pool, size_t k) {
    for (size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng_)]);
    }
    pool.resize(k);
  };
  draw(same, n_same);
  draw(diff, n_diff);
  same.insert(same.end(), diff.begin(), diff.end());
  return same;
}

std::vector<EpochLoss> Learner::run_epochs(const MatrixXd &x, std::span<const int> labels,
                                           std::span<const size_t> high,
                                           std::span<const size_t> moderate, int epochs,
                                           bool reconstruction_only) {
  check_input(x, cfg_.input_dim);
  const size_t n = static_cast<size_t>(x.rows());
  if (!reconstruction_only && labels.size() != n) throw ShapeError("one label per row required");
  std::vector<char> in_high(n, 0), in_mod(n, 0);
  for (size_t r : high) {
    if (r >= n) throw ContractError("high-reliability row out of range");
    in_high[r] = 1;
  }
  for (size_t r : moderate) {
    if (r >= n) throw ContractError("moderate-reliability row out of range");
    in_mod[r] = 1;
  }
  const bool supervised = !reconstruction_only && num_classes() > 0;

  std::vector<EpochLoss> trace;
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const size_t bs = static_cast<size_t>(cfg_.batch);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng_);
    EpochLoss acc;
    for (size_t start = 0; start < n; start += bs) {
      const size_t end = std::min(n, start + bs);
      const auto m = static_cast<Eigen::Index>(end - start);
      MatrixXd xb(m, x.cols());
      std::vector<int> yb(m, -1);
      for (Eigen::Index i = 0; i < m; ++i) {
        xb.row(i) = x.row(perm[start + i]);
        if (!reconstruction_only) yb[i] = labels[perm[start + i]];
      }
      Params grad = params_.zeros_like();
      if (cfg_.w_rec > 0) {
        LossGrad rec = reconstruction_loss(xb);
        add_scaled(grad, rec.grad, cfg_.w_rec);
        acc.rec += rec.loss;
      }
      if (supervised) {
        std::vector<Eigen::Index> ce_rows;
        std::vector<size_t> pair_members;
        for (Eigen::Index i = 0; i < m; ++i) {
          const size_t r = perm[start + i];
          if (yb[i] < 0) continue;
          if (in_high[r]) ce_rows.push_back(i);
          if (in_mod[r]) pair_members.push_back(static_cast<size_t>(i));
        }
        if (cfg_.w_ce > 0 && !ce_rows.empty()) {
          MatrixXd xc(ce_rows.size(), x.cols());
          std::vector<int> yc(ce_rows.size());
          for (size_t i = 0; i < ce_rows.size(); ++i) {
            xc.row(i) = xb.row(ce_rows[i]);
            yc[i] = yb[ce_rows[i]];
          }
          LossGrad ce = ce_loss(xc, yc);
          add_scaled(grad, ce.grad, cfg_.w_ce);
          acc.ce += ce.loss;
          ++acc.ce_batches;
        }
        if (cfg_.w_bce > 0 && pair_members.size() >= 2 && cfg_.pairs_per_batch > 0) {
          const std::vector<PairSample> pairs = sample_pairs(pair_members, yb);
          LossGrad bce = contrastive_loss(xb, pairs);
          add_scaled(grad, bce.grad, cfg_.w_bce);
          acc.bce += bce.loss;
          ++acc.bce_batches;
        }
      }
      adam_step(grad);
      ++acc.batches;
    }
    if (acc.batches) acc.rec /= acc.batches;
    if (acc.ce_batches) acc.ce /= acc.ce_batches;
    if (acc.bce_batches) acc.bce /= acc.bce_batches;
    trace.push_back(acc);
  }
  return trace;
}

std::vector<EpochLoss> Learner::pretrain_autoencoder(const MatrixXd &x, int epochs) {
  return run_epochs(x, {}, {}, {}, epochs, true);
}

std::vector<EpochLoss> Learner::train_iteration(const MatrixXd &x,
                                                std::span<const int> labels,
                                                std::span<const size_t> high,
                                                std::span<const size_t> moderate) {
  return run_epochs(x, labels, high, moderate, cfg_.epochs, false);
}

void Learner::reinit_classifier(size_t new_c) {
  const size_t c = num_classes();
  if (new_c < c) throw ContractError("classifier cannot shrink");
  if (new_c == c) return;
  const Eigen::Index dp = cfg_.proj_dim;
  std::normal_distribution<double> unit(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(double(dp));
  params_.cls_w.resize(static_cast<Eigen::Index>(new_c), dp);
  for (Eigen::Index j = 0; j < dp; ++j)
    for (Eigen::Index i = 0; i < params_.cls_w.rows(); ++i)
      params_.cls_w(i, j) = scale * unit(rng_);
  params_.cls_b = VectorXd::Zero(static_cast<Eigen::Index>(new_c));
  adam_m_.cls_w = MatrixXd::Zero(params_.cls_w.rows(), dp);
  adam_m_.cls_b = VectorXd::Zero(params_.cls_b.size());
  adam_v_.cls_w = adam_m_.cls_w;
  adam_v_.cls_b = adam_m_.cls_b;
}

namespace {

constexpr uint32_t kLearnerMagic = 0x4e4c4352;  // "RCLN"
constexpr uint32_t kLearnerVersion = 1;

template <typename T>
void put(std::ostream &out, const T &v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T get(std::istream &in) {
  T v{};
  if (!in.read(reinterpret_cast<char *>(&v), sizeof(T)))
    throw ParseError("truncated learner checkpoint", 0);
  return v;
}

void put_matrix(std::ostream &out, const MatrixXd &m) {
  put<uint64_t>(out, uint64_t(m.rows()));
  put<uint64_t>(out, uint64_t(m.cols()));
  out.write(reinterpret_cast<const char *>(m.data()), std::streamsize(m.size() * sizeof(double)));
}

MatrixXd get_matrix(std::istream &in) {
  const auto rows = get<uint64_t>(in);
  const auto cols = get<uint64_t>(in);
  if (rows > (1u << 24) || cols > (1u << 24)) throw ParseError("implausible matrix shape", 0);
  MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (!in.read(reinterpret_cast<char *>(m.data()), std::streamsize(m.size() * sizeof(double))))
    throw ParseError("truncated learner checkpoint", 0);
  return m;
}

void put_params(std::ostream &out, const Params &p) {
  put_matrix(out, p.proj_w);
  put_matrix(out, p.proj_b);
  put_matrix(out, p.enc_w);
  put_matrix(out, p.enc_b);
  put_matrix(out, p.dec_w);
  put_matrix(out, p.dec_b);
  put_matrix(out, p.cls_w);
  put_matrix(out, p.cls_b);
}

Params get_params(std::istream &in) {
  Params p;
  p.proj_w = get_matrix(in);
  p.proj_b = get_matrix(in);
  p.enc_w = get_matrix(in);
  p.enc_b = get_matrix(in);
  p.dec_w = get_matrix(in);
  p.dec_b = get_matrix(in);
  p.cls_w = get_matrix(in);
  p.cls_b = get_matrix(in);
  return p;
}

bool same_params(const Params &a, const Params &b) {
  auto x = a.blocks();
  auto y = b.blocks();
  for (size_t k = 0; k < x.size(); ++k) {
    if (x[k].size() != y[k].size()) return false;
    if (!x[k].empty() && std::memcmp(x[k].data(), y[k].data(), x[k].size_bytes()) != 0)
      return false;
  }
  return a.proj_w.rows() == b.proj_w.rows() && a.cls_w.rows() == b.cls_w.rows();
}

}  // namespace

void Learner::save(std::ostream &out) const {
  put(out, kLearnerMagic);
  put(out, kLearnerVersion);
  put<uint64_t>(out, cfg_.input_dim);
  put<int32_t>(out, cfg_.proj_dim);
  put<int32_t>(out, cfg_.low_dim);
  put<uint32_t>(out, cfg_.activation == Activation::kTanh ? 0 : 1);
  put(out, cfg_.sigma);
  put(out, cfg_.lr);
  put<int32_t>(out, cfg_.batch);
  put<int32_t>(out, cfg_.pairs_per_batch);
  put<int32_t>(out, cfg_.epochs);
  put(out, cfg_.w_rec);
  put(out, cfg_.w_ce);
  put(out, cfg_.w_bce);
  put<uint64_t>(out, cfg_.seed);
  put_params(out, params_);
  put_params(out, adam_m_);
  put_params(out, adam_v_);
  put<int64_t>(out, adam_step_);
  std::ostringstream rng_state;
  rng_state << rng_;
  const std::string s = rng_state.str();
  put<uint64_t>(out, s.size());
  out.write(s.data(), std::streamsize(s.size()));
  if (!out) throw IoError("failed writing learner checkpoint");
}

Learner Learner::load(std::istream &in) {
  if (get<uint32_t>(in) != kLearnerMagic) throw ParseError("not a learner checkpoint", 0);
  if (get<uint32_t>(in) != kLearnerVersion) throw ParseError("unsupported learner checkpoint version", 0);
  LearnerConfig cfg;
  cfg.input_dim = get<uint64_t>(in);
  cfg.proj_dim = get<int32_t>(in);
  cfg.low_dim = get<int32_t>(in);
  cfg.activation = get<uint32_t>(in) == 0 ? Activation::kTanh : Activation::kLinear;
  cfg.sigma = get<double>(in);
  cfg.lr = get<double>(in);
  cfg.batch = get<int32_t>(in);
  cfg.pairs_per_batch = get<int32_t>(in);
  cfg.epochs = get<int32_t>(in);
  cfg.w_rec = get<double>(in);
  cfg.w_ce = get<double>(in);
  cfg.w_bce = get<double>(in);
  cfg.seed = get<uint64_t>(in);
  Learner l(cfg);
  l.params_ = get_params(in);
  l.adam_m_ = get_params(in);
  l.adam_v_ = get_params(in);
  l.adam_step_ = get<int64_t>(in);
  const auto len = get<uint64_t>(in);
  std::string s(len, '\0');
  if (!in.read(s.data(), std::streamsize(len))) throw ParseError("truncated learner checkpoint", 0);
  std::istringstream rng_state(s);
  rng_state >> l.rng_;
  return l;
}

bool Learner::operator==(const Learner &other) const {
  return same_params(params_, other.params_) && same_params(adam_m_, other.adam_m_) &&
         same_params(adam_v_, other.adam_v_) && adam_step_ == other.adam_step_ &&
         rng_ == other.rng_;
}

}  // namespace relclust
