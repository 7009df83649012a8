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

#include "relclust/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "relclust/errors.hpp"

namespace relclust {

namespace {

std::vector<size_t> eligible_rows(size_t n, std::span<const size_t> excluded) {
  std::vector<bool> skip(n, false);
  for (size_t e : excluded) {
    if (e >= n) throw ContractError("excluded row out of range");
    skip[e] = true;
  }
  std::vector<size_t> rows;
  rows.reserve(n);
  for (size_t i = 0; i < n; ++i)
    if (!skip[i]) rows.push_back(i);
  return rows;
}

}  // namespace

SelectionRound select_key_points(const GeometryProfile &profile, int budget_b,
                                 double candidate_factor,
                                 std::span<const size_t> excluded) {
  if (budget_b < 1) throw ContractError("B must be >= 1");
  if (candidate_factor < 1.0) throw ContractError("candidate_factor must be >= 1");
  const size_t n = profile.rho.size();
  if (profile.xi.size() != n) throw ShapeError("rho and xi lengths differ");
  const auto &rho = profile.rho;
  const auto &xi = profile.xi;

  SelectionRound round;
  round.strategy = Strategy::kDensityPeaks;
  std::vector<size_t> rows = eligible_rows(n, excluded);
  const size_t b = static_cast<size_t>(budget_b);
  if (rows.size() < b) round.truncated = true;

  const size_t pool_size = std::min(
      rows.size(),
      static_cast<size_t>(std::ceil(candidate_factor * budget_b - 1e-9)));
  std::partial_sort(rows.begin(), rows.begin() + pool_size, rows.end(),
                    [&](size_t a, size_t c) {
                      if (xi[a] != xi[c]) return xi[a] > xi[c];
                      if (rho[a] != rho[c]) return rho[a] > rho[c];
                      return a < c;
                    });
  rows.resize(pool_size);
  round.candidates = rows;
  round.xi_c = rows.empty() ? 0.0 : xi[rows.back()];

  std::sort(rows.begin(), rows.end(), [&](size_t a, size_t c) {
    if (rho[a] != rho[c]) return rho[a] > rho[c];
    if (xi[a] != xi[c]) return xi[a] > xi[c];
    return a < c;
  });
  rows.resize(std::min(rows.size(), b));
  round.chosen = std::move(rows);
  return round;
}

bool should_stop(const StopState &state, int budget) {
  return state.total_labeled >= budget || state.consecutive_no_new >= 2;
}

void record_round(StopState &state, int labeled, int new_relations) {
  state.total_labeled += labeled;
  state.discovered_count += new_relations;
  state.consecutive_no_new = new_relations == 0 ? state.consecutive_no_new + 1 : 0;
  ++state.labeling_rounds;
}

std::vector<double> baseline_scores(Strategy strategy,
                                    const Eigen::MatrixXd &probs,
                                    const Eigen::MatrixXd *penult) {
  const Eigen::Index n = probs.rows();
  const Eigen::Index c = probs.cols();
  if (c < 1) throw ContractError("probabilities need at least one class");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-6)
      throw ContractError("probability row " + std::to_string(i) +
                          " does not sum to 1");
  }
  if (strategy == Strategy::kGradient &&
      (penult == nullptr || penult->rows() != n))
    throw ContractError("gradient strategy needs penultimate features");

  std::vector<double> score(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = probs.row(i);
    Eigen::Index top = 0;
    const double top1 = p.maxCoeff(&top);
    switch (strategy) {
      case Strategy::kConfidence:
        score[i] = -top1;
        break;
      case Strategy::kMargin: {
        double top2 = 0.0;
        for (Eigen::Index k = 0; k < c; ++k)
          if (k != top) top2 = std::max(top2, p(k));
        score[i] = -(top1 - top2);
        break;
      }
      case Strategy::kEntropy: {
        double h = 0.0;
        for (Eigen::Index k = 0; k < c; ++k)
          if (p(k) > 0) h -= p(k) * std::log(p(k));
        score[i] = h;
        break;
      }
      case Strategy::kGradient: {
        // Output-layer weight gradient of the cross entropy at the predicted
        // class is (p - e_top) h^T, whose Frobenius norm factorizes.
        Eigen::RowVectorXd resid = p;
        resid(top) -= 1.0;
        score[i] = resid.norm() * penult->row(i).norm();
        break;
      }
      default:
        throw ContractError("no score for strategy " + to_string(strategy));
    }
  }
  return score;
}

std::vector<size_t> baseline_select(Strategy strategy, size_t pool_size,
                                    const Eigen::MatrixXd *probs,
                                    const Eigen::MatrixXd *penult, int budget_b,
                                    uint64_t seed,
                                    std::span<const size_t> excluded) {
  if (budget_b < 0) throw ContractError("B must be >= 0");
  if (strategy == Strategy::kDensityPeaks)
    throw ContractError("density-peak selection goes through select_key_points");
  if (strategy != Strategy::kRandom) {
    if (probs == nullptr)
      throw ContractError(to_string(strategy) + " selection needs class probabilities");
    if (static_cast<size_t>(probs->rows()) != pool_size)
      throw ShapeError("probability rows do not match the pool size");
  }
  std::vector<size_t> rows = eligible_rows(pool_size, excluded);
  const size_t b = std::min(rows.size(), static_cast<size_t>(budget_b));

  if (strategy == Strategy::kRandom) {
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < b; ++i) {
      std::uniform_int_distribution<size_t> pick(i, rows.size() - 1);
      std::swap(rows[i], rows[pick(rng)]);
    }
    rows.resize(b);
    return rows;
  }

  const std::vector<double> score = baseline_scores(strategy, *probs, penult);
  std::partial_sort(rows.begin(), rows.begin() + b, rows.end(),
                    [&](size_t a, size_t c) {
                      if (score[a] != score[c]) return score[a] > score[c];
                      return a < c;
                    });
  rows.resize(b);
  return rows;
}

}  // namespace relclust
