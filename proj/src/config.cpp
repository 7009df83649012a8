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

#include "relclust/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "relclust/errors.hpp"

namespace relclust {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kDensityPeaks: return "ours";
    case Strategy::kRandom: return "random";
    case Strategy::kConfidence: return "confidence";
    case Strategy::kMargin: return "margin";
    case Strategy::kEntropy: return "entropy";
    case Strategy::kGradient: return "gradient";
  }
  return "?";
}

Strategy parse_strategy(const std::string &name) {
  if (name == "ours" || name == "density") return Strategy::kDensityPeaks;
  if (name == "random") return Strategy::kRandom;
  if (name == "confidence") return Strategy::kConfidence;
  if (name == "margin") return Strategy::kMargin;
  if (name == "entropy") return Strategy::kEntropy;
  if (name == "gradient") return Strategy::kGradient;
  throw ConfigError("unknown strategy: " + name);
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char *msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(per_round >= 1, "per_round must be >= 1");
  require(budget >= 0, "budget must be >= 0");
  require(budget == 0 || per_round <= budget, "per_round must not exceed budget");
  require(dc_percentile > 0 && dc_percentile < 100, "dc_percentile must lie in (0, 100)");
  require(candidate_factor >= 1.0, "candidate_factor must be >= 1");
  require(max_geometry_n >= 2, "max_geometry_n must be >= 2");
  require(theta_ce > 0 && theta_ce <= theta_bce && theta_bce <= 100,
          "need 0 < theta_ce <= theta_bce <= 100");
  require(proj_dim >= 1 && low_dim >= 1, "layer sizes must be positive");
  require(sigma > 0, "sigma must be positive");
  require(lr >= 0, "lr must be non-negative");
  require(batch >= 1, "batch must be >= 1");
  require(pairs_per_batch >= 0, "pairs_per_batch must be >= 0");
  require(epochs_per_iter >= 0 && ae_warmup_epochs >= 0, "epoch counts must be >= 0");
  require(w_rec >= 0 && w_ce >= 0 && w_bce >= 0, "loss weights must be >= 0");
  require(refine_iters >= 0 && train_rounds_per_iter >= 1 && max_iterations >= 1,
          "loop limits out of range");
}

namespace {

std::string trim(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof())
    throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

using Setter = std::function<void(RunConfig &, const std::string &, const std::string &)>;

template <typename T>
Setter field(T RunConfig::*member) {
  return [member](RunConfig &c, const std::string &k, const std::string &v) {
    c.*member = parse_number<T>(k, v);
  };
}

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = {
      {"per_round", field(&RunConfig::per_round)},
      {"B", field(&RunConfig::per_round)},
      {"budget", field(&RunConfig::budget)},
      {"N_star", field(&RunConfig::budget)},
      {"dc_percentile", field(&RunConfig::dc_percentile)},
      {"candidate_factor", field(&RunConfig::candidate_factor)},
      {"max_geometry_n", field(&RunConfig::max_geometry_n)},
      {"strategy",
       [](RunConfig &c, const std::string &, const std::string &v) {
         c.strategy = parse_strategy(v);
       }},
      {"theta_ce", field(&RunConfig::theta_ce)},
      {"theta_bce", field(&RunConfig::theta_bce)},
      {"proj_dim", field(&RunConfig::proj_dim)},
      {"low_dim", field(&RunConfig::low_dim)},
      {"activation",
       [](RunConfig &c, const std::string &, const std::string &v) {
         if (v == "tanh") c.activation = Activation::kTanh;
         else if (v == "linear") c.activation = Activation::kLinear;
         else throw ConfigError("activation must be tanh or linear");
       }},
      {"sigma", field(&RunConfig::sigma)},
      {"lr", field(&RunConfig::lr)},
      {"batch", field(&RunConfig::batch)},
      {"pairs_per_batch", field(&RunConfig::pairs_per_batch)},
      {"epochs_per_iter", field(&RunConfig::epochs_per_iter)},
      {"ae_warmup_epochs", field(&RunConfig::ae_warmup_epochs)},
      {"w_rec", field(&RunConfig::w_rec)},
      {"w_ce", field(&RunConfig::w_ce)},
      {"w_bce", field(&RunConfig::w_bce)},
      {"refine_iters", field(&RunConfig::refine_iters)},
      {"train_rounds_per_iter", field(&RunConfig::train_rounds_per_iter)},
      {"max_iterations", field(&RunConfig::max_iterations)},
      {"seed", field(&RunConfig::seed)},
  };
  return table;
}

}  // namespace

void set_config_value(RunConfig &cfg, const std::string &key,
                      const std::string &value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key: " + key);
  it->second(cfg, key, value);
}

RunConfig parse_config_text(std::istream &in, RunConfig base) {
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  base.validate();
  return base;
}

RunConfig load_config(const std::filesystem::path &path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config_text(in, base);
}

std::string dump_config(const RunConfig &c) {
  std::ostringstream out;
  out.precision(17);
  out << "per_round = " << c.per_round << '\n'
      << "budget = " << c.budget << '\n'
      << "dc_percentile = " << c.dc_percentile << '\n'
      << "candidate_factor = " << c.candidate_factor << '\n'
      << "max_geometry_n = " << c.max_geometry_n << '\n'
      << "strategy = " << to_string(c.strategy) << '\n'
      << "theta_ce = " << c.theta_ce << '\n'
      << "theta_bce = " << c.theta_bce << '\n'
      << "proj_dim = " << c.proj_dim << '\n'
      << "low_dim = " << c.low_dim << '\n'
      << "activation = " << (c.activation == Activation::kTanh ? "tanh" : "linear") << '\n'
      << "sigma = " << c.sigma << '\n'
      << "lr = " << c.lr << '\n'
      << "batch = " << c.batch << '\n'
      << "pairs_per_batch = " << c.pairs_per_batch << '\n'
      << "epochs_per_iter = " << c.epochs_per_iter << '\n'
      << "ae_warmup_epochs = " << c.ae_warmup_epochs << '\n'
      << "w_rec = " << c.w_rec << '\n'
      << "w_ce = " << c.w_ce << '\n'
      << "w_bce = " << c.w_bce << '\n'
      << "refine_iters = " << c.refine_iters << '\n'
      << "train_rounds_per_iter = " << c.train_rounds_per_iter << '\n'
      << "max_iterations = " << c.max_iterations << '\n'
      << "seed = " << c.seed << '\n';
  return out.str();
}

}  // namespace relclust
