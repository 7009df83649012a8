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

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "relclust/dataset.hpp"

namespace relclust {

struct PrecRecF1 {
  double prec = 0.0;
  double rec = 0.0;
  double f1 = 0.0;
};

struct VMeasure {
  double hom = 0.0;
  double comp = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  PrecRecF1 b3;
  VMeasure v;
  double ari = 0.0;
  PrecRecF1 cls;
  int discovered = 0;
  int iteration = 0;
};

// Harmonic mean, 0 when both are 0.
double harmonic_mean(double a, double b);

// Dense ids 0..K-1 in order of first appearance.
std::vector<int> encode_labels(std::span<const std::string> labels);

PrecRecF1 b_cubed(std::span<const int> pred, std::span<const int> gold);
VMeasure v_measure(std::span<const int> pred, std::span<const int> gold);
double ari(std::span<const int> pred, std::span<const int> gold);

PrecRecF1 b_cubed(std::span<const std::string> pred, std::span<const std::string> gold);
VMeasure v_measure(std::span<const std::string> pred, std::span<const std::string> gold);
double ari(std::span<const std::string> pred, std::span<const std::string> gold);

// Exact name match, macro-averaged over gold relations. Gold relations that
// are never predicted score 0.
PrecRecF1 classification_scores(std::span<const std::string> pred_names,
                                std::span<const std::string> gold);

// Number of gold relations that were discovered under their own name.
int relations_discovered(std::span<const std::string> discovered,
                         const std::set<std::string> &gold_universe);

// Scores predictions against the dataset's gold labels. Only rows that carry
// a gold label count; nullopt when none does.
class Scorer {
 public:
  static std::optional<MetricsReport> evaluate(const Dataset &ds,
                                               std::span<const std::string> pred_names,
                                               std::span<const std::string> discovered,
                                               int iteration);
  static std::set<std::string> gold_universe(const Dataset &ds);
};

// Table-1 column order.
const std::vector<std::string> &metric_columns();
std::vector<double> metric_values(const MetricsReport &r);
nlohmann::json to_json(const MetricsReport &r);
MetricsReport metrics_from_json(const nlohmann::json &j);

}  // namespace relclust
