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

#include "relclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "relclust/errors.hpp"

namespace relclust {

namespace {

// Sparse contingency table between two labelings.
struct Contingency {
  std::vector<double> pred_sizes;
  std::vector<double> gold_sizes;
  std::vector<std::tuple<int, int, double>> cells;  // (pred, gold, count)
  double n = 0;
};

Contingency contingency(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() != gold.size()) throw ContractError("labelings differ in length");
  if (pred.empty()) throw ContractError("cannot score an empty labeling");
  Contingency t;
  t.n = double(pred.size());
  std::unordered_map<int64_t, double> cells;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || gold[i] < 0) throw ContractError("cluster ids must be non-negative");
    const auto p = size_t(pred[i]), g = size_t(gold[i]);
    if (p >= t.pred_sizes.size()) t.pred_sizes.resize(p + 1, 0.0);
    if (g >= t.gold_sizes.size()) t.gold_sizes.resize(g + 1, 0.0);
    t.pred_sizes[p] += 1;
    t.gold_sizes[g] += 1;
    cells[int64_t(p) << 32 | int64_t(g)] += 1;
  }
  for (const auto &[key, count] : cells)
    t.cells.emplace_back(int(key >> 32), int(key & 0xffffffff), count);
  std::sort(t.cells.begin(), t.cells.end());
  return t;
}

double entropy(const std::vector<double> &sizes, double n) {
  double h = 0.0;
  for (double s : sizes)
    if (s > 0) h -= (s / n) * std::log(s / n);
  return h;
}

double comb2(double x) { return x * (x - 1) / 2.0; }

}  // namespace

double harmonic_mean(double a, double b) {
  return a + b > 0 ? 2.0 * a * b / (a + b) : 0.0;
}

std::vector<int> encode_labels(std::span<const std::string> labels) {
  std::unordered_map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto &l : labels) {
    auto [it, inserted] = ids.emplace(l, int(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

PrecRecF1 b_cubed(std::span<const int> pred, std::span<const int> gold) {
  const Contingency t = contingency(pred, gold);
  // Each of the n_pg members of a cell sees n_pg same-cluster same-gold peers.
  double prec = 0.0, rec = 0.0;
  for (const auto &[p, g, count] : t.cells) {
    prec += count * count / t.pred_sizes[p];
    rec += count * count / t.gold_sizes[g];
  }
  PrecRecF1 out;
  out.prec = prec / t.n;
  out.rec = rec / t.n;
  out.f1 = harmonic_mean(out.prec, out.rec);
  return out;
}

VMeasure v_measure(std::span<const int> pred, std::span<const int> gold) {
  const Contingency t = contingency(pred, gold);
  const double h_gold = entropy(t.gold_sizes, t.n);
  const double h_pred = entropy(t.pred_sizes, t.n);
  double h_gold_given_pred = 0.0, h_pred_given_gold = 0.0;
  for (const auto &[p, g, count] : t.cells) {
    h_gold_given_pred -= (count / t.n) * std::log(count / t.pred_sizes[p]);
    h_pred_given_gold -= (count / t.n) * std::log(count / t.gold_sizes[g]);
  }
  VMeasure v;
  v.hom = h_gold > 0 ? 1.0 - h_gold_given_pred / h_gold : 1.0;
  v.comp = h_pred > 0 ? 1.0 - h_pred_given_gold / h_pred : 1.0;
  v.f1 = harmonic_mean(v.hom, v.comp);
  return v;
}

double ari(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() < 2) throw ContractError("ARI needs at least two instances");
  const Contingency t = contingency(pred, gold);
  double index = 0.0, sum_pred = 0.0, sum_gold = 0.0;
  for (const auto &cell : t.cells) index += comb2(std::get<2>(cell));
  for (double s : t.pred_sizes) sum_pred += comb2(s);
  for (double s : t.gold_sizes) sum_gold += comb2(s);
  const double expected = sum_pred * sum_gold / comb2(t.n);
  const double max_index = 0.5 * (sum_pred + sum_gold);
  // Zero denominator only when both labelings are the same trivial partition.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

PrecRecF1 b_cubed(std::span<const std::string> pred, std::span<const std::string> gold) {
  const auto p = encode_labels(pred), g = encode_labels(gold);
  return b_cubed(std::span<const int>(p), std::span<const int>(g));
}

VMeasure v_measure(std::span<const std::string> pred, std::span<const std::string> gold) {
  const auto p = encode_labels(pred), g = encode_labels(gold);
  return v_measure(std::span<const int>(p), std::span<const int>(g));
}

double ari(std::span<const std::string> pred, std::span<const std::string> gold) {
  const auto p = encode_labels(pred), g = encode_labels(gold);
  return ari(std::span<const int>(p), std::span<const int>(g));
}

PrecRecF1 classification_scores(std::span<const std::string> pred_names,
                                std::span<const std::string> gold) {
  if (pred_names.size() != gold.size()) throw ContractError("labelings differ in length");
  if (gold.empty()) throw ContractError("cannot score an empty labeling");
  std::unordered_map<std::string, double> gold_count, pred_count, hits;
  for (size_t i = 0; i < gold.size(); ++i) {
    gold_count[gold[i]] += 1;
    pred_count[pred_names[i]] += 1;
    if (pred_names[i] == gold[i]) hits[gold[i]] += 1;
  }
  PrecRecF1 out;
  for (const auto &[rel, count] : gold_count) {
    const double tp = hits.count(rel) ? hits[rel] : 0.0;
    const double predicted = pred_count.count(rel) ? pred_count[rel] : 0.0;
    const double p = predicted > 0 ? tp / predicted : 0.0;
    const double r = tp / count;
    out.prec += p;
    out.rec += r;
    out.f1 += harmonic_mean(p, r);
  }
  const double k = double(gold_count.size());
  out.prec /= k;
  out.rec /= k;
  out.f1 /= k;
  return out;
}

int relations_discovered(std::span<const std::string> discovered,
                         const std::set<std::string> &gold_universe) {
  std::set<std::string> seen;
  for (const auto &name : discovered)
    if (gold_universe.count(name)) seen.insert(name);
  return static_cast<int>(seen.size());
}

std::set<std::string> Scorer::gold_universe(const Dataset &ds) {
  std::set<std::string> out;
  for (const auto &g : ds.gold(GoldKey{}))
    if (g) out.insert(*g);
  return out;
}

std::optional<MetricsReport> Scorer::evaluate(const Dataset &ds,
                                              std::span<const std::string> pred_names,
                                              std::span<const std::string> discovered,
                                              int iteration) {
  if (pred_names.size() != ds.size()) throw ShapeError("one prediction per instance required");
  const auto &gold = ds.gold(GoldKey{});
  std::vector<std::string> p, g;
  for (size_t i = 0; i < ds.size(); ++i) {
    if (!gold[i]) continue;
    p.push_back(pred_names[i]);
    g.push_back(*gold[i]);
  }
  if (g.empty()) return std::nullopt;
  MetricsReport r;
  r.iteration = iteration;
  r.b3 = b_cubed(std::span<const std::string>(p), std::span<const std::string>(g));
  r.v = v_measure(std::span<const std::string>(p), std::span<const std::string>(g));
  r.ari = g.size() >= 2 ? ari(std::span<const std::string>(p), std::span<const std::string>(g)) : 1.0;
  r.cls = classification_scores(p, g);
  r.discovered = relations_discovered(discovered, gold_universe(ds));
  return r;
}

const std::vector<std::string> &metric_columns() {
  static const std::vector<std::string> cols = {
      "b3_prec", "b3_rec", "b3_f1",    "v_hom",   "v_comp",  "v_f1",
      "ari",     "cls_prec", "cls_rec", "cls_f1", "discovered"};
  return cols;
}

std::vector<double> metric_values(const MetricsReport &r) {
  return {r.b3.prec, r.b3.rec, r.b3.f1,   r.v.hom,   r.v.comp,  r.v.f1,
          r.ari,     r.cls.prec, r.cls.rec, r.cls.f1, double(r.discovered)};
}

nlohmann::json to_json(const MetricsReport &r) {
  nlohmann::json j;
  j["iteration"] = r.iteration;
  const auto values = metric_values(r);
  const auto &cols = metric_columns();
  for (size_t k = 0; k < cols.size(); ++k) j[cols[k]] = values[k];
  j["discovered"] = r.discovered;
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json &j) {
  MetricsReport r;
  r.iteration = j.at("iteration").get<int>();
  r.b3 = {j.at("b3_prec").get<double>(), j.at("b3_rec").get<double>(), j.at("b3_f1").get<double>()};
  r.v = {j.at("v_hom").get<double>(), j.at("v_comp").get<double>(), j.at("v_f1").get<double>()};
  r.ari = j.at("ari").get<double>();
  r.cls = {j.at("cls_prec").get<double>(), j.at("cls_rec").get<double>(), j.at("cls_f1").get<double>()};
  r.discovered = j.at("discovered").get<int>();
  return r;
}

}  // namespace relclust
