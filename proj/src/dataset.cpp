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

#include "relclust/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "relclust/errors.hpp"

namespace relclust {

namespace {

using nlohmann::json;

void put_u32(std::ostream &out, uint32_t v) {
  std::array<char, 4> b{static_cast<char>(v & 0xff),
                        static_cast<char>((v >> 8) & 0xff),
                        static_cast<char>((v >> 16) & 0xff),
                        static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

uint32_t get_u32(const unsigned char *b) {
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

std::string trim(const std::string &s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Dataset::Dataset(std::string name, size_t dim, std::vector<Instance> instances,
                 GoldLabels gold)
    : name_(std::move(name)),
      dim_(dim),
      instances_(std::move(instances)),
      gold_(std::move(gold)) {
  if (instances_.empty()) throw ShapeError("dataset '" + name_ + "' is empty");
  if (dim_ == 0) throw ShapeError("dataset dimension must be positive");
  if (gold_.empty()) gold_.resize(instances_.size());
  if (gold_.size() != instances_.size())
    throw ShapeError("gold label count does not match instance count");
  by_id_.reserve(instances_.size());
  for (size_t i = 0; i < instances_.size(); ++i) {
    const Instance &inst = instances_[i];
    if (inst.embedding.size() != dim_) {
      throw ShapeError("instance " + std::to_string(inst.id) + " has " +
                       std::to_string(inst.embedding.size()) +
                       " components, expected " + std::to_string(dim_));
    }
    for (float v : inst.embedding) {
      if (!std::isfinite(v))
        throw NumericError("instance " + std::to_string(inst.id) +
                           " has a non-finite component");
    }
    if (!by_id_.emplace(inst.id, i).second)
      throw ShapeError("duplicate instance id " + std::to_string(inst.id));
  }
}

std::optional<size_t> Dataset::index_of(int64_t id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

Eigen::MatrixXd Dataset::matrix() const {
  Eigen::MatrixXd m(instances_.size(), dim_);
  for (size_t i = 0; i < instances_.size(); ++i)
    for (size_t k = 0; k < dim_; ++k) m(i, k) = instances_[i].embedding[k];
  return m;
}

Dataset Dataset::subset(const std::vector<size_t> &rows,
                        std::string name) const {
  std::vector<Instance> inst;
  GoldLabels gold;
  inst.reserve(rows.size());
  gold.reserve(rows.size());
  for (size_t r : rows) {
    if (r >= instances_.size()) throw ContractError("subset row out of range");
    inst.push_back(instances_[r]);
    gold.push_back(gold_[r]);
  }
  return Dataset(std::move(name), dim_, std::move(inst), std::move(gold));
}

std::filesystem::path binary_label_path(const std::filesystem::path &bin) {
  auto p = bin;
  p += ".labels";
  return p;
}

DataFormat format_for_path(const std::filesystem::path &path) {
  return path.extension() == ".bin" ? DataFormat::kBinary : DataFormat::kJsonl;
}

namespace {

Dataset load_jsonl(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Instance> instances;
  GoldLabels gold;
  std::optional<size_t> dim;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ParseError("malformed JSON record: " + std::string(e.what()),
                       lineno);
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_number_integer())
      throw ParseError("record needs an integer \"id\"", lineno);
    if (!rec.contains("embedding") || !rec["embedding"].is_array())
      throw ParseError("record needs an \"embedding\" array", lineno);
    Instance inst;
    inst.id = rec["id"].get<int64_t>();
    for (const auto &v : rec["embedding"]) {
      if (!v.is_number()) throw ParseError("non-numeric embedding value", lineno);
      inst.embedding.push_back(static_cast<float>(v.get<double>()));
    }
    if (!dim) dim = inst.embedding.size();
    if (inst.embedding.size() != *dim) {
      throw ShapeError("line " + std::to_string(lineno) + ": embedding has " +
                       std::to_string(inst.embedding.size()) +
                       " components, expected " + std::to_string(*dim));
    }
    if (rec.contains("text") && !rec["text"].is_null()) {
      if (!rec["text"].is_string()) throw ParseError("\"text\" must be a string", lineno);
      inst.text = rec["text"].get<std::string>();
    }
    std::optional<std::string> g;
    if (rec.contains("gold") && !rec["gold"].is_null()) {
      if (!rec["gold"].is_string()) throw ParseError("\"gold\" must be a string", lineno);
      g = rec["gold"].get<std::string>();
    }
    instances.push_back(std::move(inst));
    gold.push_back(std::move(g));
  }
  if (instances.empty()) throw ParseError("no records in " + path.string(), 0);
  return Dataset(path.stem().string(), *dim, std::move(instances),
                 std::move(gold));
}

Dataset load_binary(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<unsigned char, 16> header{};
  if (!in.read(reinterpret_cast<char *>(header.data()), header.size()))
    throw ParseError("truncated header in " + path.string(), 0);
  if (get_u32(header.data()) != kBinaryMagic)
    throw ParseError("bad magic in " + path.string(), 0);
  const uint32_t n = get_u32(header.data() + 4);
  const uint32_t d = get_u32(header.data() + 8);
  if (n == 0 || d == 0) throw ShapeError("binary file declares an empty matrix");

  std::vector<unsigned char> raw(size_t(n) * d * 4);
  if (!in.read(reinterpret_cast<char *>(raw.data()), raw.size()))
    throw ShapeError("binary payload shorter than declared " +
                     std::to_string(n) + "x" + std::to_string(d));
  if (in.peek() != std::char_traits<char>::eof())
    throw ShapeError("binary payload longer than declared " +
                     std::to_string(n) + "x" + std::to_string(d));

  std::vector<Instance> instances(n);
  for (uint32_t i = 0; i < n; ++i) {
    instances[i].id = i;
    instances[i].embedding.resize(d);
    for (uint32_t k = 0; k < d; ++k) {
      uint32_t bits = get_u32(raw.data() + (size_t(i) * d + k) * 4);
      std::memcpy(&instances[i].embedding[k], &bits, 4);
    }
  }

  GoldLabels gold(n);
  auto label_path = binary_label_path(path);
  if (std::filesystem::exists(label_path)) {
    std::ifstream lf(label_path);
    std::string line;
    size_t row = 0;
    while (std::getline(lf, line)) {
      if (row >= n) throw ShapeError("label file has more rows than the matrix");
      std::string label = trim(line);
      if (label.empty())
        throw ParseError("empty label (use \"-\" for none)", row + 1);
      if (label != "-") gold[row] = label;
      ++row;
    }
    if (row != n) throw ShapeError("label file has fewer rows than the matrix");
  }
  return Dataset(path.stem().string(), d, std::move(instances),
                 std::move(gold));
}

}  // namespace

Dataset load_dataset(const std::filesystem::path &path, DataFormat format) {
  if (!std::filesystem::exists(path))
    throw IoError("no such file: " + path.string());
  return format == DataFormat::kJsonl ? load_jsonl(path) : load_binary(path);
}

void save_dataset(const Dataset &ds, const std::filesystem::path &path,
                  DataFormat format) {
  if (format == DataFormat::kJsonl)
    save_jsonl(ds, path);
  else
    save_binary(ds, path);
}

void save_jsonl(const Dataset &ds, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (size_t i = 0; i < ds.size(); ++i) {
    const Instance &inst = ds[i];
    json rec;
    rec["id"] = inst.id;
    // float -> double is exact and the JSON writer round-trips doubles.
    json emb = json::array();
    for (float v : inst.embedding) emb.push_back(static_cast<double>(v));
    rec["embedding"] = std::move(emb);
    if (!inst.text.empty()) rec["text"] = inst.text;
    if (ds.gold_[i]) rec["gold"] = *ds.gold_[i];
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void save_binary(const Dataset &ds, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  put_u32(out, kBinaryMagic);
  put_u32(out, static_cast<uint32_t>(ds.size()));
  put_u32(out, static_cast<uint32_t>(ds.dim()));
  put_u32(out, 0);
  for (const Instance &inst : ds.instances()) {
    for (float v : inst.embedding) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_u32(out, bits);
    }
  }
  if (!out) throw IoError("write failed for " + path.string());

  std::ofstream lf(binary_label_path(path));
  if (!lf) throw IoError("cannot write " + binary_label_path(path).string());
  for (const auto &g : ds.gold_) lf << (g ? *g : std::string("-")) << '\n';
}

std::vector<int> synth_cluster_sizes(const SynthSpec &spec) {
  if (spec.num_clusters < 1) throw ConfigError("num_clusters must be >= 1");
  if (spec.tail_decay < 0) throw ConfigError("tail_decay must be >= 0");
  std::vector<int> sizes(spec.num_clusters);
  for (int c = 0; c < spec.num_clusters; ++c) {
    sizes[c] = static_cast<int>(
        std::floor(spec.head_size / (spec.tail_decay * c + 1.0)));
    if (sizes[c] < 1) {
      throw ConfigError("cluster " + std::to_string(c) +
                        " would be empty; raise head_size or lower tail_decay");
    }
  }
  return sizes;
}

std::string synth_label(int cluster) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rel_%02d", cluster);
  return buf;
}

Dataset generate_synthetic(const SynthSpec &spec) {
  if (spec.dim < 1) throw ConfigError("dim must be >= 1");
  if (spec.cluster_spread < 0 || spec.center_spread < 0 || spec.noise_std < 0 ||
      spec.noise_dims < 0)
    throw ConfigError("spreads and noise settings must be non-negative");
  const std::vector<int> sizes = synth_cluster_sizes(spec);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const int total_dim = spec.dim + spec.noise_dims;

  std::vector<std::vector<double>> centers(spec.num_clusters);
  for (auto &c : centers) {
    c.resize(spec.dim);
    for (double &v : c) v = spec.center_spread * unit(rng);
  }

  std::vector<Instance> instances;
  GoldLabels gold;
  for (int c = 0; c < spec.num_clusters; ++c) {
    for (int m = 0; m < sizes[c]; ++m) {
      Instance inst;
      inst.embedding.resize(total_dim);
      for (int k = 0; k < spec.dim; ++k)
        inst.embedding[k] = static_cast<float>(
            centers[c][k] + spec.cluster_spread * unit(rng));
      for (int k = spec.dim; k < total_dim; ++k)
        inst.embedding[k] = static_cast<float>(spec.noise_std * unit(rng));
      instances.push_back(std::move(inst));
      gold.push_back(synth_label(c));
    }
  }

  // Interleave clusters so index order carries no label information.
  std::vector<size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Instance> shuffled;
  GoldLabels shuffled_gold;
  shuffled.reserve(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    shuffled.push_back(std::move(instances[order[i]]));
    shuffled.back().id = static_cast<int64_t>(i);
    shuffled.back().text = "synthetic instance " + std::to_string(i);
    shuffled_gold.push_back(std::move(gold[order[i]]));
  }
  std::ostringstream name;
  name << "synth-k" << spec.num_clusters << "-s" << spec.seed;
  return Dataset(name.str(), total_dim, std::move(shuffled),
                 std::move(shuffled_gold));
}

SynthSpec parse_synth_spec(const std::string &text) {
  SynthSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("synthetic spec item without '=': " + item);
    std::string key = trim(item.substr(0, eq));
    std::string val = trim(item.substr(eq + 1));
    try {
      if (key == "k" || key == "clusters") spec.num_clusters = std::stoi(val);
      else if (key == "head") spec.head_size = std::stoi(val);
      else if (key == "decay") spec.tail_decay = std::stod(val);
      else if (key == "dim") spec.dim = std::stoi(val);
      else if (key == "spread") spec.cluster_spread = std::stod(val);
      else if (key == "center") spec.center_spread = std::stod(val);
      else if (key == "seed") spec.seed = std::stoull(val);
      else if (key == "noise_dims") spec.noise_dims = std::stoi(val);
      else if (key == "noise_std") spec.noise_std = std::stod(val);
      else throw ConfigError("unknown synthetic spec key: " + key);
    } catch (const std::logic_error &e) {
      if (dynamic_cast<const ConfigError *>(&e)) throw;
      throw ConfigError("bad value for synthetic spec key " + key + ": " + val);
    }
  }
  return spec;
}

std::pair<Dataset, Dataset> split_validation(const Dataset &ds,
                                             double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("validation fraction must lie in (0, 1)");
  const size_t n = ds.size();
  const size_t n_val = static_cast<size_t>(std::llround(fraction * n));
  if (n_val == 0 || n_val == n)
    throw ConfigError("validation fraction leaves one side of the split empty");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<size_t> val(order.begin(), order.begin() + n_val);
  std::vector<size_t> train(order.begin() + n_val, order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {ds.subset(train, ds.name() + "-train"),
          ds.subset(val, ds.name() + "-val")};
}

}  // namespace relclust
