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

// Brute-force reference implementations used only by the tests. Each one
// takes a deliberately different route from the library code it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "relclust/learner.hpp"

namespace oracle {

inline Eigen::MatrixXd sq_distances(const Eigen::MatrixXd &x) {
  const auto n = x.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index m = 0; m < x.cols(); ++m) s += (x(i, m) - x(j, m)) * (x(i, m) - x(j, m));
      d(i, j) = s;
    }
  return d;
}

// Integer percent only, so the rank is exact: ceil(p * M / 100).
inline double threshold(const Eigen::MatrixXd &d, int percent) {
  std::vector<double> pairs;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) pairs.push_back(d(i, j));
  std::sort(pairs.begin(), pairs.end(), std::greater<>());
  const size_t m = pairs.size();
  size_t rank = (size_t(percent) * m + 99) / 100;
  rank = std::clamp<size_t>(rank, 1, m);
  return pairs[rank - 1];
}

inline std::vector<int> density(const Eigen::MatrixXd &d, double dc) {
  std::vector<int> rho(size_t(d.rows()), 0);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    int inside = 0, outside = 0;
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (i == j) continue;
      if (d(i, j) < dc) ++inside;
      if (d(i, j) > dc) ++outside;
    }
    rho[size_t(i)] = inside - outside;
  }
  return rho;
}

inline std::vector<double> sparsity(const Eigen::MatrixXd &d, const std::vector<int> &rho) {
  const size_t n = rho.size();
  std::vector<double> xi(n);
  for (size_t i = 0; i < n; ++i) {
    bool any = false;
    double best = 0.0, far = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      far = std::max(far, d(Eigen::Index(i), Eigen::Index(j)));
      const bool higher = rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
      if (!higher) continue;
      if (!any || d(Eigen::Index(i), Eigen::Index(j)) < best) best = d(Eigen::Index(i), Eigen::Index(j));
      any = true;
    }
    xi[i] = any ? best : far;
  }
  return xi;
}

// Full sorts over every eligible point.
inline std::vector<size_t> select(const std::vector<int> &rho, const std::vector<double> &xi,
                                  int b, double factor, const std::set<size_t> &excluded) {
  std::vector<size_t> pool;
  for (size_t i = 0; i < rho.size(); ++i)
    if (!excluded.count(i)) pool.push_back(i);
  std::sort(pool.begin(), pool.end(), [&](size_t a, size_t c) {
    return std::make_tuple(-xi[a], -rho[a], a) < std::make_tuple(-xi[c], -rho[c], c);
  });
  const size_t want = size_t(std::ceil(factor * b - 1e-9));
  pool.resize(std::min(pool.size(), want));
  std::sort(pool.begin(), pool.end(), [&](size_t a, size_t c) {
    return std::make_tuple(-rho[a], -xi[a], a) < std::make_tuple(-rho[c], -xi[c], c);
  });
  pool.resize(std::min(pool.size(), size_t(b)));
  return pool;
}

// Per-instance B-cubed by direct enumeration.
inline std::tuple<double, double, double> b_cubed(const std::vector<int> &pred,
                                                  const std::vector<int> &gold) {
  const size_t n = pred.size();
  double p = 0, r = 0;
  for (size_t i = 0; i < n; ++i) {
    double same_cluster = 0, same_gold = 0, both = 0;
    for (size_t j = 0; j < n; ++j) {
      same_cluster += pred[j] == pred[i];
      same_gold += gold[j] == gold[i];
      both += pred[j] == pred[i] && gold[j] == gold[i];
    }
    p += both / same_cluster;
    r += both / same_gold;
  }
  p /= double(n);
  r /= double(n);
  return {p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
}

// Conditional entropies via H(A|B) = H(A,B) - H(B).
inline std::tuple<double, double, double> v_measure(const std::vector<int> &pred,
                                                    const std::vector<int> &gold) {
  const double n = double(pred.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pc, gc;
  for (size_t i = 0; i < pred.size(); ++i) {
    joint[{pred[i], gold[i]}] += 1;
    pc[pred[i]] += 1;
    gc[gold[i]] += 1;
  }
  auto h = [n](const auto &counts) {
    double e = 0;
    for (const auto &kv : counts) e -= kv.second / n * std::log(kv.second / n);
    return e;
  };
  const double hj = h(joint), hp = h(pc), hg = h(gc);
  const double hom = hg == 0 ? 1.0 : 1.0 - (hj - hp) / hg;
  const double comp = hp == 0 ? 1.0 : 1.0 - (hj - hg) / hp;
  return {hom, comp, hom + comp > 0 ? 2 * hom * comp / (hom + comp) : 0.0};
}

// Rand counts over all unordered pairs.
inline double ari(const std::vector<int> &pred, const std::vector<int> &gold) {
  double a = 0, b = 0, c = 0, m = 0;
  for (size_t i = 0; i < pred.size(); ++i)
    for (size_t j = i + 1; j < pred.size(); ++j) {
      const bool sp = pred[i] == pred[j], sg = gold[i] == gold[j];
      a += sp && sg;
      b += sp && !sg;
      c += !sp && sg;
      m += 1;
    }
  const double expected = (a + b) * (a + c) / m;
  const double max_index = ((a + b) + (a + c)) / 2;
  if (max_index == expected) return 1.0;
  return (a - expected) / (max_index - expected);
}

// Confusion matrix, macro over gold classes.
inline std::tuple<double, double, double> classification(const std::vector<std::string> &pred,
                                                         const std::vector<std::string> &gold) {
  std::set<std::string> classes(gold.begin(), gold.end());
  std::map<std::string, std::map<std::string, double>> conf;  // gold -> pred -> count
  for (size_t i = 0; i < gold.size(); ++i) conf[gold[i]][pred[i]] += 1;
  double P = 0, R = 0, F = 0;
  for (const auto &g : classes) {
    double tp = conf[g][g], row = 0, col = 0;
    for (const auto &kv : conf[g]) row += kv.second;
    for (auto &kv : conf) {
      auto it = kv.second.find(g);
      if (it != kv.second.end()) col += it->second;
    }
    const double p = col > 0 ? tp / col : 0, r = tp / row;
    P += p;
    R += r;
    F += p + r > 0 ? 2 * p * r / (p + r) : 0;
  }
  const double k = double(classes.size());
  return {P / k, R / k, F / k};
}

// Element-wise forward pass written with plain loops.
struct Forward {
  std::vector<std::vector<double>> proj, low, recon, probs;
};

inline Forward forward(const relclust::Params &p, relclust::Activation act,
                       const Eigen::MatrixXd &x) {
  Forward f;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> proj(size_t(p.proj_w.rows())), low(size_t(p.enc_w.rows())),
        recon(size_t(p.dec_w.rows())), logits(size_t(p.cls_w.rows()));
    for (size_t i = 0; i < proj.size(); ++i) {
      double s = p.proj_b(Eigen::Index(i));
      for (Eigen::Index k = 0; k < x.cols(); ++k) s += p.proj_w(Eigen::Index(i), k) * x(r, k);
      proj[i] = act == relclust::Activation::kTanh ? std::tanh(s) : s;
    }
    for (size_t i = 0; i < low.size(); ++i) {
      double s = p.enc_b(Eigen::Index(i));
      for (size_t k = 0; k < proj.size(); ++k) s += p.enc_w(Eigen::Index(i), Eigen::Index(k)) * proj[k];
      low[i] = s;
    }
    for (size_t i = 0; i < recon.size(); ++i) {
      double s = p.dec_b(Eigen::Index(i));
      for (size_t k = 0; k < low.size(); ++k) s += p.dec_w(Eigen::Index(i), Eigen::Index(k)) * low[k];
      recon[i] = s;
    }
    for (size_t i = 0; i < logits.size(); ++i) {
      double s = p.cls_b(Eigen::Index(i));
      for (size_t k = 0; k < proj.size(); ++k) s += p.cls_w(Eigen::Index(i), Eigen::Index(k)) * proj[k];
      logits[i] = s;
    }
    std::vector<double> probs(logits.size());
    if (!logits.empty()) {
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0;
      for (size_t i = 0; i < logits.size(); ++i) z += std::exp(logits[i] - mx);
      for (size_t i = 0; i < logits.size(); ++i) probs[i] = std::exp(logits[i] - mx) / z;
    }
    f.proj.push_back(proj);
    f.low.push_back(low);
    f.recon.push_back(recon);
    f.probs.push_back(probs);
  }
  return f;
}

inline double reconstruction_loss(const relclust::Params &p, relclust::Activation act,
                                  const Eigen::MatrixXd &x,
                                  const std::vector<std::vector<double>> *frozen_proj = nullptr) {
  const Forward f = forward(p, act, x);
  const auto &target = frozen_proj ? *frozen_proj : f.proj;
  double s = 0, count = 0;
  for (size_t r = 0; r < f.proj.size(); ++r)
    for (size_t i = 0; i < f.proj[r].size(); ++i) {
      s += (f.recon[r][i] - target[r][i]) * (f.recon[r][i] - target[r][i]);
      count += 1;
    }
  return s / count;
}

inline double ce_loss(const relclust::Params &p, relclust::Activation act, const Eigen::MatrixXd &x,
                      const std::vector<int> &labels) {
  const Forward f = forward(p, act, x);
  double s = 0;
  for (size_t r = 0; r < labels.size(); ++r) s -= std::log(f.probs[r][size_t(labels[r])]);
  return s / double(labels.size());
}

inline double kl(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] > 0) s += a[i] * std::log(a[i] / b[i]);
  return s;
}

// Pair loss where the starred distributions come from `frozen` and stay
// fixed while `p` is perturbed.
inline double contrastive_loss(const relclust::Params &p, relclust::Activation act,
                               const Eigen::MatrixXd &x,
                               const std::vector<relclust::PairSample> &pairs, double sigma,
                               const std::vector<std::vector<double>> &frozen) {
  const Forward f = forward(p, act, x);
  double s = 0;
  for (const auto &pr : pairs) {
    const double k1 = kl(frozen[pr.a], f.probs[pr.b]);  // KL(P*_a || P_b)
    const double k2 = kl(f.probs[pr.a], frozen[pr.b]);  // KL(P_a || P*_b)
    s += pr.same ? k1 + k2 : std::max(0.0, sigma - k1) + std::max(0.0, sigma - k2);
  }
  return s / double(pairs.size());
}

// Central differences of `loss` over every parameter of every block.
template <class Loss>
relclust::Params numeric_gradient(relclust::Params p, Loss loss, double h = 1e-6) {
  relclust::Params g = p.zeros_like();
  auto pb = p.blocks();
  auto gb = g.blocks();
  for (size_t b = 0; b < pb.size(); ++b)
    for (size_t i = 0; i < pb[b].size(); ++i) {
      const double keep = pb[b][i];
      pb[b][i] = keep + h;
      const double up = loss(p);
      pb[b][i] = keep - h;
      const double down = loss(p);
      pb[b][i] = keep;
      gb[b][i] = (up - down) / (2 * h);
    }
  return g;
}

// Largest |a - n| / max(|a|, |n|, floor) across all parameters.
inline double max_relative_error(const relclust::Params &analytic, const relclust::Params &numeric,
                                 double floor = 1e-3) {
  auto a = analytic.blocks();
  auto n = numeric.blocks();
  double worst = 0;
  for (size_t b = 0; b < a.size(); ++b)
    for (size_t i = 0; i < a[b].size(); ++i) {
      const double denom = std::max({std::abs(a[b][i]), std::abs(n[b][i]), floor});
      worst = std::max(worst, std::abs(a[b][i] - n[b][i]) / denom);
    }
  return worst;
}

inline std::vector<int> random_partition(std::mt19937_64 &rng, size_t n, int max_k) {
  std::uniform_int_distribution<int> pick(0, max_k - 1);
  std::vector<int> out(n);
  for (auto &v : out) v = pick(rng);
  return out;
}

}  // namespace oracle
