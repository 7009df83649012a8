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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relclust/dataset.hpp"

namespace relclust {

// Discovered relations in order of first discovery.
class RelationSet {
 public:
  // Returns true when `name` was not known before.
  bool add(const std::string &name, int iteration);
  bool contains(const std::string &name) const { return index_.count(name) > 0; }
  std::optional<size_t> index_of(const std::string &name) const;
  size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string> &names() const { return names_; }
  int first_seen(const std::string &name) const;
  int first_seen_at(size_t index) const { return first_seen_[index]; }

  bool operator==(const RelationSet &other) const {
    return names_ == other.names_ && first_seen_ == other.first_seen_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<int> first_seen_;
  std::unordered_map<std::string, size_t> index_;
};

// |after| - |before|; throws ContractError unless before is a subset of after.
int new_relations_this_round(const RelationSet &before, const RelationSet &after);

// Trims surrounding whitespace. Case is preserved. Throws ContractError when
// nothing is left.
std::string normalize_label(std::string_view raw);

struct Neighbor {
  int64_t id = 0;
  double distance = 0.0;
  std::optional<std::string> label;  // set for already-labeled neighbors
};

struct LabelRequest {
  int64_t id = 0;
  std::string text;
  std::vector<Neighbor> labeled_neighbors;
  std::vector<Neighbor> unlabeled_neighbors;
};

struct LabelResponse {
  int64_t id = 0;
  std::string relation;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string kind() const = 0;
  // One response per request. May throw OracleUnavailable.
  virtual std::vector<LabelResponse> label(const std::vector<LabelRequest> &requests,
                                           int iteration,
                                           const RelationSet &known) = 0;
  // Labels already delivered for an interrupted batch.
  virtual std::vector<LabelResponse> partial_responses() const { return {}; }
};

// Asks `oracle` for labels, normalizes them and grows `relations` in the
// order the responses arrive.
std::vector<LabelResponse> request_labels(Oracle &oracle,
                                          const std::vector<LabelRequest> &requests,
                                          RelationSet &relations, int iteration);

// Answers with each instance's gold label, standing in for a human.
class GoldOracle : public Oracle {
 public:
  explicit GoldOracle(const Dataset &ds) : ds_(ds) {}
  std::string kind() const override { return "gold"; }
  std::vector<LabelResponse> label(const std::vector<LabelRequest> &requests,
                                   int iteration, const RelationSet &known) override;
  const std::optional<std::string> &label_of(size_t row) const {
    return ds_.gold(GoldKey{})[row];
  }

 private:
  const Dataset &ds_;
};

// Prompts a person on a text stream. A numeric answer picks a listed
// relation; anything else names a (possibly new) relation.
class ConsoleOracle : public Oracle {
 public:
  ConsoleOracle(std::istream &in, std::ostream &out) : in_(in), out_(out) {}
  std::string kind() const override { return "console"; }
  std::vector<LabelResponse> label(const std::vector<LabelRequest> &requests,
                                   int iteration, const RelationSet &known) override;
  std::vector<LabelResponse> partial_responses() const override { return partial_; }

 private:
  std::istream &in_;
  std::ostream &out_;
  std::vector<LabelResponse> partial_;
};

enum class SubmitStatus {
  kAccepted,
  kDuplicate,       // same id, same relation: idempotent
  kNotPending,      // id is not in the open batch
  kAlreadyLabeled,  // id labeled before with a different relation
  kEmptyRelation,
};

std::string to_string(SubmitStatus s);

struct SubmitResult {
  SubmitStatus status = SubmitStatus::kNotPending;
  std::string relation;
  bool new_relation = false;
  size_t remaining = 0;
};

// The one place where the engine and the annotation service meet. Every
// access goes through a single mutex; the engine blocks on wait_complete()
// while submit() calls arrive from service threads.
class AnnotationQueue {
 public:
  // Engine side.
  void open_batch(int iteration, std::vector<LabelRequest> requests,
                  const RelationSet &known);
  // Labels in submission order once every request is answered; nullopt on
  // timeout, leaving the batch open.
  std::optional<std::vector<LabelResponse>> wait_complete(std::chrono::milliseconds timeout);
  std::vector<LabelResponse> received() const;
  void close_batch();
  // Wakes any waiter and rejects further batches; used at shutdown.
  void cancel();

  // Service side.
  SubmitResult submit(int64_t id, const std::string &raw_relation);
  std::vector<LabelRequest> pending() const;
  RelationSet relations() const;
  bool batch_open() const;
  int iteration() const;
  size_t total_labeled() const;

 private:
  bool complete_locked() const;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool open_ = false;
  bool cancelled_ = false;
  int iteration_ = 0;
  std::vector<LabelRequest> requests_;
  std::vector<LabelResponse> received_;
  std::map<int64_t, std::string> labeled_;  // every id labeled through the queue
  RelationSet relations_;
};

// Oracle backed by an AnnotationQueue filled by the HTTP service.
class QueueOracle : public Oracle {
 public:
  QueueOracle(AnnotationQueue &queue, std::chrono::milliseconds timeout)
      : queue_(queue), timeout_(timeout) {}
  std::string kind() const override { return "http"; }
  std::vector<LabelResponse> label(const std::vector<LabelRequest> &requests,
                                   int iteration, const RelationSet &known) override;
  std::vector<LabelResponse> partial_responses() const override { return partial_; }

 private:
  AnnotationQueue &queue_;
  std::chrono::milliseconds timeout_;
  std::vector<LabelResponse> partial_;
};

}  // namespace relclust
