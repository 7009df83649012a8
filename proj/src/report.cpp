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

#include "relclust/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "relclust/errors.hpp"

namespace relclust {

namespace {

using json = nlohmann::json;

std::string fmt(double v, const char *spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void append_metrics(std::ostringstream &out, const std::optional<MetricsReport> &m) {
  const size_t cols = metric_columns().size();
  const std::vector<double> values = m ? metric_values(*m) : std::vector<double>();
  for (size_t k = 0; k < cols; ++k) {
    out << ',';
    if (!m) continue;
    if (metric_columns()[k] == "discovered")
      out << m->discovered;
    else
      out << fmt(values[k]);
  }
}

json optional_metrics(const std::optional<MetricsReport> &m) {
  return m ? to_json(*m) : json(nullptr);
}

std::optional<MetricsReport> metrics_or_null(const json &j) {
  if (j.is_null()) return std::nullopt;
  return metrics_from_json(j);
}

}  // namespace

json to_json(const IterationRecord &r) {
  return {{"iteration", r.iteration},
          {"labeling", r.labeling},
          {"labeled", r.labeled},
          {"total_labeled", r.total_labeled},
          {"new_relations", r.new_relations},
          {"consecutive_no_new", r.consecutive_no_new},
          {"relations", r.relations},
          {"changed_fraction", r.changed_fraction},
          {"high_size", r.high_size},
          {"moderate_size", r.moderate_size},
          {"loss_rec", r.loss_rec},
          {"loss_ce", r.loss_ce},
          {"loss_bce", r.loss_bce},
          {"chosen", r.chosen},
          {"metrics", optional_metrics(r.metrics)},
          {"val_metrics", optional_metrics(r.val_metrics)}};
}

IterationRecord record_from_json(const json &j) {
  IterationRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.labeling = j.at("labeling").get<bool>();
  r.labeled = j.at("labeled").get<int>();
  r.total_labeled = j.at("total_labeled").get<int>();
  r.new_relations = j.at("new_relations").get<int>();
  r.consecutive_no_new = j.at("consecutive_no_new").get<int>();
  r.relations = j.at("relations").get<int>();
  r.changed_fraction = j.at("changed_fraction").get<double>();
  r.high_size = j.at("high_size").get<size_t>();
  r.moderate_size = j.at("moderate_size").get<size_t>();
  r.loss_rec = j.at("loss_rec").get<double>();
  r.loss_ce = j.at("loss_ce").get<double>();
  r.loss_bce = j.at("loss_bce").get<double>();
  r.chosen = j.at("chosen").get<std::vector<int64_t>>();
  r.metrics = metrics_or_null(j.at("metrics"));
  r.val_metrics = metrics_or_null(j.at("val_metrics"));
  return r;
}

std::string iterations_csv(const std::vector<IterationRecord> &history) {
  bool with_val = false;
  for (const auto &r : history) with_val |= r.val_metrics.has_value();

  std::ostringstream out;
  out << "iteration,labeling,labeled,total_labeled,new_relations,consecutive_no_new,"
         "relations,changed_fraction,high_size,moderate_size,loss_rec,loss_ce,loss_bce";
  for (const auto &c : metric_columns()) out << ',' << c;
  if (with_val)
    for (const auto &c : metric_columns()) out << ",val_" << c;
  out << '\n';
  for (const auto &r : history) {
    out << r.iteration << ',' << (r.labeling ? 1 : 0) << ',' << r.labeled << ','
        << r.total_labeled << ',' << r.new_relations << ',' << r.consecutive_no_new << ','
        << r.relations << ',' << fmt(r.changed_fraction) << ',' << r.high_size << ','
        << r.moderate_size << ',' << fmt(r.loss_rec, "%.6g") << ',' << fmt(r.loss_ce, "%.6g")
        << ',' << fmt(r.loss_bce, "%.6g");
    append_metrics(out, r.metrics);
    if (with_val) append_metrics(out, r.val_metrics);
    out << '\n';
  }
  return out.str();
}

RunSummary summarize(const RunResult &result) {
  RunSummary s;
  s.completed = result.completed;
  s.stop_reason = result.stop_reason;
  s.iterations = int(result.history.size());
  s.total_labeled = int(result.keys.size());
  for (size_t i = 0; i < result.relations.size(); ++i)
    s.relations.emplace_back(result.relations.names()[i], result.relations.first_seen_at(i));
  s.keys = result.keys;
  s.final_metrics = result.final_metrics;
  s.history = result.history;
  return s;
}

json to_json(const RunSummary &s) {
  json j;
  j["completed"] = s.completed;
  j["stop_reason"] = s.stop_reason;
  j["iterations"] = s.iterations;
  j["total_labeled"] = s.total_labeled;
  j["relations"] = json::array();
  for (const auto &[name, first] : s.relations)
    j["relations"].push_back({{"name", name}, {"first_seen", first}});
  j["keys"] = json::array();
  for (const auto &k : s.keys)
    j["keys"].push_back({{"row", k.row}, {"id", k.id}, {"relation", k.relation},
                         {"iteration", k.iteration}});
  j["final_metrics"] = optional_metrics(s.final_metrics);
  j["history"] = json::array();
  for (const auto &r : s.history) j["history"].push_back(to_json(r));
  return j;
}

RunSummary summary_from_json(const json &j) {
  RunSummary s;
  s.completed = j.at("completed").get<bool>();
  s.stop_reason = j.at("stop_reason").get<std::string>();
  s.iterations = j.at("iterations").get<int>();
  s.total_labeled = j.at("total_labeled").get<int>();
  for (const auto &r : j.at("relations"))
    s.relations.emplace_back(r.at("name").get<std::string>(), r.at("first_seen").get<int>());
  for (const auto &k : j.at("keys"))
    s.keys.push_back(KeyPoint{k.at("row").get<size_t>(), k.at("id").get<int64_t>(),
                              k.at("relation").get<std::string>(), k.at("iteration").get<int>()});
  s.final_metrics = metrics_or_null(j.at("final_metrics"));
  for (const auto &r : j.at("history")) s.history.push_back(record_from_json(r));
  return s;
}

std::vector<AssignmentRow> assignment_rows(const Dataset &ds, const RunResult &result) {
  if (result.labels.size() != ds.size()) throw ShapeError("result does not cover the dataset");
  std::vector<char> is_key(ds.size(), 0);
  for (const auto &k : result.keys) is_key[k.row] = 1;
  std::vector<AssignmentRow> rows;
  for (size_t i = 0; i < ds.size(); ++i)
    rows.push_back({ds[i].id, result.labels[i],
                    i < result.reliability.size() ? result.reliability[i] : 0.0,
                    is_key[i] != 0});
  return rows;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void write_assignments(const std::vector<AssignmentRow> &rows, const std::filesystem::path &path) {
  std::ostringstream out;
  out << "id\trelation\treliability\tis_key\n";
  for (const auto &r : rows)
    out << r.id << '\t' << r.relation << '\t' << fmt(r.reliability, "%.17g") << '\t'
        << (r.is_key ? 1 : 0) << '\n';
  write_text(path, out.str());
}

std::vector<AssignmentRow> read_assignments(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<AssignmentRow> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, '\t');) cells.push_back(cell);
    // An unassigned row has an empty relation cell.
    if (cells.size() != 4) throw ParseError("expected 4 tab-separated fields", lineno);
    try {
      rows.push_back({std::stoll(cells[0]), cells[1], std::stod(cells[2]), cells[3] == "1"});
    } catch (const std::logic_error &) {
      throw ParseError("bad number in assignment row", lineno);
    }
  }
  return rows;
}

void emit_report(const std::filesystem::path &dir, const Dataset &ds, const RunResult &result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  write_text(dir / "iterations.csv", iterations_csv(result.history));
  write_text(dir / "summary.json", to_json(summarize(result)).dump(2) + "\n");
  write_assignments(assignment_rows(ds, result), dir / "assignments.tsv");
}

std::vector<BenchRow> bench_sweep(const RunConfig &base, const std::vector<Strategy> &strategies,
                                  const std::vector<uint64_t> &seeds,
                                  const std::function<Dataset(uint64_t)> &make_dataset) {
  std::vector<BenchRow> rows;
  for (uint64_t seed : seeds) {
    const Dataset ds = make_dataset(seed);
    for (Strategy s : strategies) {
      RunConfig cfg = base;
      cfg.strategy = s;
      cfg.seed = seed;
      GoldOracle oracle(ds);
      const RunResult r = run_loop(cfg, ds, oracle);
      if (!r.final_metrics) throw ContractError("bench datasets need gold labels");
      rows.push_back({s, seed, *r.final_metrics, int(r.relations.size()), int(r.keys.size())});
    }
  }
  return rows;
}

namespace {

std::vector<Strategy> strategies_in_order(const std::vector<BenchRow> &rows) {
  std::vector<Strategy> out;
  for (const auto &r : rows)
    if (std::find(out.begin(), out.end(), r.strategy) == out.end()) out.push_back(r.strategy);
  return out;
}

std::vector<uint64_t> seeds_in_order(const std::vector<BenchRow> &rows) {
  std::vector<uint64_t> out;
  for (const auto &r : rows)
    if (std::find(out.begin(), out.end(), r.seed) == out.end()) out.push_back(r.seed);
  return out;
}

}  // namespace

std::string bench_discovery_csv(const std::vector<BenchRow> &rows) {
  const auto strategies = strategies_in_order(rows);
  const auto seeds = seeds_in_order(rows);
  std::ostringstream out;
  out << "strategy";
  for (uint64_t s : seeds) out << ",seed_" << s;
  out << ",total,mean\n";
  for (Strategy st : strategies) {
    out << to_string(st);
    int total = 0, count = 0;
    for (uint64_t s : seeds) {
      out << ',';
      for (const auto &r : rows)
        if (r.strategy == st && r.seed == s) {
          out << r.metrics.discovered;
          total += r.metrics.discovered;
          ++count;
        }
    }
    out << ',' << total << ',' << fmt(count ? double(total) / count : 0.0, "%.2f") << '\n';
  }
  return out.str();
}

std::string bench_quality_csv(const std::vector<BenchRow> &rows) {
  std::ostringstream out;
  out << "strategy,runs";
  for (const auto &c : metric_columns()) out << ',' << c;
  out << '\n';
  for (Strategy st : strategies_in_order(rows)) {
    std::vector<double> sum(metric_columns().size(), 0.0);
    int n = 0;
    for (const auto &r : rows) {
      if (r.strategy != st) continue;
      const auto v = metric_values(r.metrics);
      for (size_t k = 0; k < v.size(); ++k) sum[k] += v[k];
      ++n;
    }
    out << to_string(st) << ',' << n;
    for (double s : sum) out << ',' << fmt(n ? s / n : 0.0, "%.4f");
    out << '\n';
  }
  return out.str();
}

}  // namespace relclust
