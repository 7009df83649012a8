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

#include "relclust/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "relclust/errors.hpp"
#include "relclust/geometry.hpp"
#include "relclust/report.hpp"

namespace relclust {

namespace {

using Eigen::MatrixXd;
using json = nlohmann::json;

constexpr int kCheckpointVersion = 1;
constexpr int kMinRefineIters = 3;
constexpr double kSettledFraction = 1e-3;

// Distinct stream per (seed, iteration, purpose).
uint64_t derive_seed(uint64_t seed, int iteration, uint64_t salt) {
  uint64_t z = seed * 0x9E3779B97F4A7C15ULL + uint64_t(iteration) * 0xBF58476D1CE4E5B9ULL + salt;
  z ^= z >> 31;
  z *= 0x94D049BB133111EBULL;
  return z ^ (z >> 29);
}

double row_distance(const MatrixXd &a, Eigen::Index i, const MatrixXd &b, Eigen::Index j) {
  return std::sqrt((a.row(i) - b.row(j)).squaredNorm());
}

std::vector<std::string> labels_of(const std::vector<PseudoAssignment> &assign) {
  std::vector<std::string> out;
  out.reserve(assign.size());
  for (const auto &a : assign) out.push_back(a.label);
  return out;
}

double changed_fraction(const std::vector<std::string> &prev,
                        const std::vector<std::string> &cur) {
  if (prev.size() != cur.size() || cur.empty()) return 1.0;
  size_t changed = 0;
  for (size_t i = 0; i < cur.size(); ++i) changed += prev[i] != cur[i];
  return double(changed) / double(cur.size());
}

// Labels for rows of `query` from the nearest key representation.
std::vector<std::string> nearest_key_labels(const MatrixXd &query, const MatrixXd &key_reps,
                                            const KeyPointSet &keys) {
  std::vector<std::string> out(static_cast<size_t>(query.rows()));
  if (keys.empty()) return out;
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    Eigen::Index best = 0;
    double best_d = (query.row(i) - key_reps.row(0)).squaredNorm();
    for (Eigen::Index k = 1; k < key_reps.rows(); ++k) {
      const double d = (query.row(i) - key_reps.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out[size_t(i)] = keys[size_t(best)].relation;
  }
  return out;
}

RunState initial_state(const RunConfig &cfg, const Dataset &ds) {
  cfg.validate();
  return RunState(Learner(LearnerConfig::from_run(cfg, ds.dim())));
}

}  // namespace

void RunMonitor::configure(const RunConfig &cfg) {
  std::lock_guard<std::mutex> lock(mu_);
  snap_.budget = cfg.budget;
  snap_.per_round = cfg.per_round;
  snap_.strategy = cfg.strategy;
}

void RunMonitor::set_status(const std::string &status) {
  std::lock_guard<std::mutex> lock(mu_);
  snap_.status = status;
}

void RunMonitor::publish(const RunState &state, const std::string &status) {
  std::lock_guard<std::mutex> lock(mu_);
  snap_.status = status;
  snap_.iteration = state.iteration;
  snap_.total_labeled = state.stop.total_labeled;
  snap_.history = state.history;
}

RunMonitor::Snapshot RunMonitor::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return snap_;
}

std::vector<PseudoAssignment> assign_or_empty(const MatrixXd &low, const KeyPointSet &keys,
                                              size_t n) {
  if (!keys.empty()) return assign_pseudo_labels(low, keys);
  std::vector<PseudoAssignment> out(n);
  for (size_t i = 0; i < n; ++i) out[i].row = i;
  return out;
}

Engine::Engine(const RunConfig &cfg, const Dataset &ds, Oracle &oracle, EngineOptions opts)
    : Engine(cfg, ds, oracle, opts, initial_state(cfg, ds)) {}

Engine::Engine(const RunConfig &cfg, const Dataset &ds, Oracle &oracle, EngineOptions opts,
               RunState state)
    : cfg_(cfg), ds_(ds), oracle_(oracle), opts_(opts), scaling_(InputScaling::fit(ds.matrix())),
      x_(scaling_.apply(ds.matrix())),
      state_(std::move(state)) {
  cfg_.validate();
  if (opts_.validation && opts_.validation->dim() != ds.dim())
    throw ShapeError("validation set dimension differs from the training pool");
  if (opts_.monitor) opts_.monitor->configure(cfg_);
  if (state_.iteration == 0 && state_.history.empty() && cfg_.ae_warmup_epochs > 0)
    state_.learner.pretrain_autoencoder(x_, cfg_.ae_warmup_epochs);
}

std::vector<size_t> Engine::key_rows() const {
  std::vector<size_t> rows;
  rows.reserve(state_.keys.size());
  for (const auto &k : state_.keys) rows.push_back(k.row);
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<size_t> Engine::choose_rows(const MatrixXd &low, const Encoded &enc, int count) {
  const std::vector<size_t> keys = key_rows();
  const size_t n = ds_.size();
  const int iter = state_.iteration;

  if (cfg_.strategy == Strategy::kDensityPeaks) {
    // Distance matrix on a sample, always keeping the existing key points.
    std::vector<size_t> rows = subsample(n, size_t(cfg_.max_geometry_n),
                                         derive_seed(cfg_.seed, iter, 1));
    rows.insert(rows.end(), keys.begin(), keys.end());
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    if (rows.size() < 2) return {};

    MatrixXd sub(rows.size(), low.cols());
    for (size_t i = 0; i < rows.size(); ++i) sub.row(Eigen::Index(i)) = low.row(Eigen::Index(rows[i]));
    std::vector<size_t> local_keys;
    for (size_t k : keys)
      local_keys.push_back(size_t(std::lower_bound(rows.begin(), rows.end(), k) - rows.begin()));

    GeometryProfile profile = build_profile(sub, cfg_.dc_percentile);
    profile.xi = apply_keypoint_repulsion(profile.xi, sub, local_keys);
    SelectionRound round = select_key_points(profile, count, cfg_.candidate_factor, local_keys);
    std::vector<size_t> chosen;
    for (size_t c : round.chosen) chosen.push_back(rows[c]);
    return chosen;
  }

  // Uncertainty baselines need a classifier; before the first labels they
  // fall back to random picks.
  const uint64_t seed = derive_seed(cfg_.seed, iter, 2);
  if (cfg_.strategy == Strategy::kRandom || state_.learner.num_classes() == 0)
    return baseline_select(Strategy::kRandom, n, nullptr, nullptr, count, seed, keys);
  const MatrixXd probs = state_.learner.class_probs(x_);
  return baseline_select(cfg_.strategy, n, &probs, &enc.proj, count, seed, keys);
}

std::vector<LabelRequest> Engine::build_requests(const MatrixXd &low,
                                                 const std::vector<size_t> &rows) const {
  std::vector<char> is_key(ds_.size(), 0);
  for (const auto &k : state_.keys) is_key[k.row] = 1;
  const size_t want = size_t(std::max(0, opts_.context_neighbors));

  std::vector<LabelRequest> out;
  for (size_t r : rows) {
    LabelRequest req;
    req.id = ds_[r].id;
    req.text = ds_[r].text;
    std::vector<std::pair<double, size_t>> labeled, unlabeled;
    for (size_t j = 0; j < ds_.size(); ++j) {
      if (j == r) continue;
      const double d = row_distance(low, Eigen::Index(r), low, Eigen::Index(j));
      (is_key[j] ? labeled : unlabeled).emplace_back(d, j);
    }
    auto take = [&](std::vector<std::pair<double, size_t>> &pool, bool with_label) {
      const size_t k = std::min(want, pool.size());
      std::partial_sort(pool.begin(), pool.begin() + long(k), pool.end());
      std::vector<Neighbor> out;
      for (size_t i = 0; i < k; ++i) {
        Neighbor nb{ds_[pool[i].second].id, pool[i].first, std::nullopt};
        if (with_label)
          for (const auto &key : state_.keys)
            if (key.row == pool[i].second) nb.label = key.relation;
        out.push_back(std::move(nb));
      }
      return out;
    };
    req.labeled_neighbors = take(labeled, true);
    req.unlabeled_neighbors = take(unlabeled, false);
    out.push_back(std::move(req));
  }
  return out;
}

void Engine::apply_responses(const std::vector<size_t> &rows,
                             const std::vector<LabelResponse> &responses, int iteration) {
  for (const auto &resp : responses) {
    const auto row = ds_.index_of(resp.id);
    if (!row || std::find(rows.begin(), rows.end(), *row) == rows.end())
      throw ContractError("label for an instance that was not requested");
    state_.keys.push_back(KeyPoint{*row, resp.id, resp.relation, iteration});
  }
}

void Engine::finish_round(IterationRecord &rec, const RelationSet &before, int labeled) {
  const int fresh = new_relations_this_round(before, state_.relations);
  record_round(state_.stop, labeled, fresh);
  state_.stop.discovered_count = int(state_.relations.size());
  if (fresh > 0) state_.learner.reinit_classifier(state_.relations.size());
  rec.labeling = true;
  rec.labeled = labeled;
  rec.new_relations = fresh;
  state_.pending.reset();
}

void Engine::labeling_round(const MatrixXd &low) {
  IterationRecord &rec = state_.history.back();
  const RelationSet before = state_.relations;
  std::vector<size_t> rows;
  std::vector<LabelResponse> partial;

  if (state_.pending && state_.pending->iteration == state_.iteration) {
    rows = state_.pending->rows;
    partial = state_.pending->partial;
  } else {
    const int count = std::min(cfg_.per_round, cfg_.budget - state_.stop.total_labeled);
    const Encoded enc = state_.learner.encode(x_);
    rows = choose_rows(low, enc, count);
    state_.pending = PendingBatch{state_.iteration, rows, {}};
  }
  rec.chosen.clear();
  for (size_t r : rows) rec.chosen.push_back(ds_[r].id);

  // Labels that arrived before an interruption are kept; only the rest are asked again.
  for (const auto &p : partial) state_.relations.add(normalize_label(p.relation), state_.iteration);
  std::vector<size_t> ask;
  for (size_t r : rows) {
    const bool answered = std::any_of(partial.begin(), partial.end(),
                                      [&](const LabelResponse &p) { return p.id == ds_[r].id; });
    if (!answered) ask.push_back(r);
  }

  std::vector<LabelResponse> responses = partial;
  for (auto &p : responses) p.relation = normalize_label(p.relation);
  if (!ask.empty()) {
    publish("waiting");
    try {
      auto fresh = request_labels(oracle_, build_requests(low, ask), state_.relations,
                                  state_.iteration);
      responses.insert(responses.end(), fresh.begin(), fresh.end());
    } catch (const OracleUnavailable &) {
      for (const auto &p : oracle_.partial_responses()) state_.pending->partial.push_back(p);
      state_.relations = before;
      throw;
    }
  }
  apply_responses(rows, responses, state_.iteration);
  finish_round(rec, before, int(responses.size()));
}

void Engine::train(const MatrixXd &low, IterationRecord &rec) {
  if (state_.keys.empty()) return;
  const auto assign = assign_pseudo_labels(low, state_.keys);
  const auto part = partition_by_reliability(assign, cfg_.theta_ce, cfg_.theta_bce);
  std::vector<int> labels(assign.size());
  for (size_t i = 0; i < assign.size(); ++i)
    labels[i] = int(*state_.relations.index_of(assign[i].label));
  rec.high_size = part.high.size();
  rec.moderate_size = part.moderate.size();
  for (int round = 0; round < cfg_.train_rounds_per_iter; ++round) {
    const auto trace = state_.learner.train_iteration(x_, labels, part.high, part.moderate);
    if (!trace.empty()) {
      rec.loss_rec = trace.back().rec;
      rec.loss_ce = trace.back().ce;
      rec.loss_bce = trace.back().bce;
    }
  }
}

bool Engine::step() {
  if (state_.finished) return false;
  // Resumed mid-iteration: the record for this iteration already exists.
  const bool resumed = !state_.history.empty() && state_.history.back().iteration == state_.iteration &&
                       state_.pending;
  if (!resumed) {
    IterationRecord rec;
    rec.iteration = state_.iteration;
    state_.history.push_back(rec);
  }
  publish("running");

  MatrixXd low = state_.learner.encode(x_).low;
  const bool label_now = state_.pending.has_value() || !should_stop(state_.stop, cfg_.budget);
  if (label_now) labeling_round(low);

  IterationRecord &rec = state_.history.back();
  train(low, rec);

  // Scores and convergence use the representation after this iteration's update.
  low = state_.learner.encode(x_).low;
  const auto assign = assign_or_empty(low, state_.keys, ds_.size());
  const std::vector<std::string> labels = labels_of(assign);
  rec.changed_fraction = changed_fraction(state_.last_labels, labels);
  state_.last_labels = labels;
  rec.total_labeled = state_.stop.total_labeled;
  rec.consecutive_no_new = state_.stop.consecutive_no_new;
  rec.relations = int(state_.relations.size());
  rec.metrics = Scorer::evaluate(ds_, labels, state_.relations.names(), state_.iteration);
  if (opts_.validation) {
    MatrixXd key_reps(state_.keys.size(), low.cols());
    for (size_t k = 0; k < state_.keys.size(); ++k)
      key_reps.row(Eigen::Index(k)) = low.row(Eigen::Index(state_.keys[k].row));
    const MatrixXd val_low = state_.learner.encode(scaling_.apply(opts_.validation->matrix())).low;
    const auto val_labels = nearest_key_labels(val_low, key_reps, state_.keys);
    rec.val_metrics = Scorer::evaluate(*opts_.validation, val_labels, state_.relations.names(),
                                       state_.iteration);
  }

  if (!label_now) {
    ++state_.refine_done;
    state_.stable_streak = rec.changed_fraction < kSettledFraction ? state_.stable_streak + 1 : 0;
  }
  const bool labeling_over = should_stop(state_.stop, cfg_.budget);
  if (labeling_over &&
      (state_.refine_done >= std::max(kMinRefineIters, cfg_.refine_iters) ||
       state_.stable_streak >= 2)) {
    state_.finished = true;
    state_.stop_reason = state_.stop.total_labeled >= cfg_.budget ? "budget" : "no_new_relations";
  } else if (state_.iteration + 1 >= cfg_.max_iterations) {
    state_.finished = true;
    state_.stop_reason = "max_iterations";
  }
  ++state_.iteration;
  if (!opts_.checkpoint_dir.empty()) save_checkpoint(opts_.checkpoint_dir);
  publish(state_.finished ? "finished" : "running");
  return !state_.finished;
}

RunResult Engine::run() {
  try {
    while (step()) {
    }
  } catch (const OracleUnavailable &) {
    if (!opts_.checkpoint_dir.empty()) save_checkpoint(opts_.checkpoint_dir);
    publish("interrupted");
    RunResult r = result();
    r.completed = false;
    r.stop_reason = "interrupted";
    return r;
  }
  return result();
}

RunResult Engine::result() const {
  RunResult r;
  r.completed = state_.finished;
  r.stop_reason = state_.stop_reason;
  r.history = state_.history;
  r.relations = state_.relations;
  r.keys = state_.keys;
  const MatrixXd low = state_.learner.encode(x_).low;
  const auto assign = assign_or_empty(low, state_.keys, ds_.size());
  r.labels = labels_of(assign);
  for (const auto &a : assign) r.reliability.push_back(a.reliability);
  for (auto it = state_.history.rbegin(); it != state_.history.rend(); ++it)
    if (it->metrics) {
      r.final_metrics = it->metrics;
      break;
    }
  return r;
}

void Engine::publish(const std::string &status) const {
  if (opts_.monitor) opts_.monitor->publish(state_, status);
}

void Engine::save_checkpoint(const std::filesystem::path &dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string());

  json j;
  j["version"] = kCheckpointVersion;
  j["config"] = dump_config(cfg_);
  j["dataset"] = {{"name", ds_.name()}, {"size", ds_.size()}, {"dim", ds_.dim()}};
  j["iteration"] = state_.iteration;
  j["keys"] = json::array();
  for (const auto &k : state_.keys)
    j["keys"].push_back({{"row", k.row}, {"id", k.id}, {"relation", k.relation},
                         {"iteration", k.iteration}});
  j["relations"] = json::array();
  for (size_t i = 0; i < state_.relations.size(); ++i)
    j["relations"].push_back({{"name", state_.relations.names()[i]},
                              {"first_seen", state_.relations.first_seen_at(i)}});
  j["stop"] = {{"total_labeled", state_.stop.total_labeled},
               {"consecutive_no_new", state_.stop.consecutive_no_new},
               {"discovered_count", state_.stop.discovered_count},
               {"labeling_rounds", state_.stop.labeling_rounds}};
  j["history"] = json::array();
  for (const auto &rec : state_.history) j["history"].push_back(to_json(rec));
  j["refine_done"] = state_.refine_done;
  j["stable_streak"] = state_.stable_streak;
  j["last_labels"] = state_.last_labels;
  j["finished"] = state_.finished;
  j["stop_reason"] = state_.stop_reason;
  if (state_.pending) {
    json p;
    p["iteration"] = state_.pending->iteration;
    p["rows"] = state_.pending->rows;
    p["partial"] = json::array();
    for (const auto &r : state_.pending->partial)
      p["partial"].push_back({{"id", r.id}, {"relation", r.relation}});
    j["pending"] = p;
  }

  // Write to temporaries first so a crash never leaves a torn checkpoint.
  const auto state_tmp = dir / "state.json.tmp", learner_tmp = dir / "learner.bin.tmp";
  {
    std::ofstream out(state_tmp);
    out << j.dump(1) << '\n';
    if (!out) throw IoError("cannot write " + state_tmp.string());
  }
  {
    std::ofstream out(learner_tmp, std::ios::binary);
    state_.learner.save(out);
    if (!out) throw IoError("cannot write " + learner_tmp.string());
  }
  std::filesystem::rename(learner_tmp, dir / "learner.bin");
  std::filesystem::rename(state_tmp, dir / "state.json");
}

Engine Engine::resume(const std::filesystem::path &dir, const Dataset &ds, Oracle &oracle,
                      EngineOptions opts) {
  std::ifstream in(dir / "state.json");
  if (!in) throw IoError("no checkpoint in " + dir.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw ParseError(std::string("corrupt checkpoint: ") + e.what(), 0);
  }
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw ConfigError("unsupported checkpoint version");
  if (j.at("dataset").at("size").get<size_t>() != ds.size() ||
      j.at("dataset").at("dim").get<size_t>() != ds.dim())
    throw ShapeError("checkpoint was written for a different dataset");

  std::istringstream cfg_text(j.at("config").get<std::string>());
  const RunConfig cfg = parse_config_text(cfg_text);

  std::ifstream lin(dir / "learner.bin", std::ios::binary);
  if (!lin) throw IoError("checkpoint is missing learner.bin");
  RunState st(Learner::load(lin));
  st.iteration = j.at("iteration").get<int>();
  for (const auto &k : j.at("keys"))
    st.keys.push_back(KeyPoint{k.at("row").get<size_t>(), k.at("id").get<int64_t>(),
                               k.at("relation").get<std::string>(), k.at("iteration").get<int>()});
  for (const auto &r : j.at("relations"))
    st.relations.add(r.at("name").get<std::string>(), r.at("first_seen").get<int>());
  const auto &s = j.at("stop");
  st.stop = StopState{s.at("total_labeled").get<int>(), s.at("consecutive_no_new").get<int>(),
                      s.at("discovered_count").get<int>(), s.at("labeling_rounds").get<int>()};
  for (const auto &h : j.at("history")) st.history.push_back(record_from_json(h));
  st.refine_done = j.at("refine_done").get<int>();
  st.stable_streak = j.at("stable_streak").get<int>();
  st.last_labels = j.at("last_labels").get<std::vector<std::string>>();
  st.finished = j.at("finished").get<bool>();
  st.stop_reason = j.at("stop_reason").get<std::string>();
  if (j.contains("pending")) {
    const auto &p = j.at("pending");
    PendingBatch pb;
    pb.iteration = p.at("iteration").get<int>();
    pb.rows = p.at("rows").get<std::vector<size_t>>();
    for (const auto &r : p.at("partial"))
      pb.partial.push_back({r.at("id").get<int64_t>(), r.at("relation").get<std::string>()});
    st.pending = pb;
  }
  for (const auto &k : st.keys)
    if (k.row >= ds.size() || ds[k.row].id != k.id)
      throw ShapeError("checkpoint key points do not match the dataset");
  return Engine(cfg, ds, oracle, opts, std::move(st));
}

RunResult run_loop(const RunConfig &cfg, const Dataset &ds, Oracle &oracle, EngineOptions opts) {
  Engine engine(cfg, ds, oracle, opts);
  return engine.run();
}

}  // namespace relclust
