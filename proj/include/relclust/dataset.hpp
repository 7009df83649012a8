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
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace relclust {

struct Instance {
  int64_t id = 0;
  std::vector<float> embedding;
  std::string text;
};

// Passkey for reading gold labels. Only the simulated oracle and the scorer
// can construct one, so nothing on the training path can see gold labels.
class GoldKey {
 private:
  GoldKey() = default;
  friend class GoldOracle;
  friend class Scorer;
};

using GoldLabels = std::vector<std::optional<std::string>>;

// Immutable pool of embedded instances. Ids are unique, every embedding has
// dim() finite components, and the pool is never empty.
class Dataset {
 public:
  Dataset(std::string name, size_t dim, std::vector<Instance> instances,
          GoldLabels gold = {});

  const std::string &name() const { return name_; }
  size_t dim() const { return dim_; }
  size_t size() const { return instances_.size(); }
  const Instance &operator[](size_t i) const { return instances_[i]; }
  const std::vector<Instance> &instances() const { return instances_; }

  std::optional<size_t> index_of(int64_t id) const;

  // N x dim copy of the embeddings in double precision.
  Eigen::MatrixXd matrix() const;

  const GoldLabels &gold(GoldKey) const { return gold_; }

  // A copy holding the rows in `rows`, in that order.
  Dataset subset(const std::vector<size_t> &rows, std::string name) const;

 private:
  friend void save_jsonl(const Dataset &, const std::filesystem::path &);
  friend void save_binary(const Dataset &, const std::filesystem::path &);

  std::string name_;
  size_t dim_;
  std::vector<Instance> instances_;
  GoldLabels gold_;
  std::unordered_map<int64_t, size_t> by_id_;
};

enum class DataFormat { kJsonl, kBinary };

// Binary files: 16-byte header of little-endian uint32 {magic, N, d, 0}
// followed by N*d little-endian float32, row-major. Labels live in a sidecar
// text file (binary_label_path) with one label per line and "-" for none.
inline constexpr uint32_t kBinaryMagic = 0x4d454352;  // "RCEM"

std::filesystem::path binary_label_path(const std::filesystem::path &bin);

Dataset load_dataset(const std::filesystem::path &path, DataFormat format);
void save_dataset(const Dataset &ds, const std::filesystem::path &path,
                  DataFormat format);
void save_jsonl(const Dataset &ds, const std::filesystem::path &path);
void save_binary(const Dataset &ds, const std::filesystem::path &path);

// Guesses the format from the extension: .bin is binary, anything else JSONL.
DataFormat format_for_path(const std::filesystem::path &path);

// Long-tail mixture: cluster c gets floor(head_size / (tail_decay * c + 1))
// members drawn around a random center.
struct SynthSpec {
  int num_clusters = 40;
  int head_size = 700;
  double tail_decay = 0.5;
  int dim = 32;
  double cluster_spread = 1.0;
  double center_spread = 4.0;
  uint64_t seed = 0;
  // Extra dimensions of pure noise appended to every embedding.
  int noise_dims = 0;
  double noise_std = 0.0;
};

std::vector<int> synth_cluster_sizes(const SynthSpec &spec);
std::string synth_label(int cluster);
Dataset generate_synthetic(const SynthSpec &spec);

// Parses "k=40,head=70,decay=0.5,dim=32,spread=1,center=4,seed=3" (any
// subset of keys, plus noise_dims and noise_std).
SynthSpec parse_synth_spec(const std::string &text);

// Seeded disjoint split; |val| = round(fraction * N).
std::pair<Dataset, Dataset> split_validation(const Dataset &ds,
                                             double fraction, uint64_t seed);

}  // namespace relclust
