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

#include "relclust/oracle.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "relclust/errors.hpp"

namespace relclust {

bool RelationSet::add(const std::string &name, int iteration) {
  if (index_.count(name)) return false;
  index_.emplace(name, names_.size());
  names_.push_back(name);
  first_seen_.push_back(iteration);
  return true;
}

std::optional<size_t> RelationSet::index_of(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int RelationSet::first_seen(const std::string &name) const {
  auto idx = index_of(name);
  if (!idx) throw ContractError("unknown relation: " + name);
  return first_seen_[*idx];
}

int new_relations_this_round(const RelationSet &before, const RelationSet &after) {
  for (const auto &name : before.names())
    if (!after.contains(name))
      throw ContractError("relation '" + name + "' disappeared between rounds");
  return static_cast<int>(after.size() - before.size());
}

std::string normalize_label(std::string_view raw) {
  const auto b = raw.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) throw ContractError("empty relation name");
  const auto e = raw.find_last_not_of(" \t\r\n");
  return std::string(raw.substr(b, e - b + 1));
}

std::vector<LabelResponse> request_labels(Oracle &oracle,
                                          const std::vector<LabelRequest> &requests,
                                          RelationSet &relations, int iteration) {
  std::vector<LabelResponse> responses = oracle.label(requests, iteration, relations);
  if (responses.size() != requests.size())
    throw ContractError(oracle.kind() + " oracle returned " +
                        std::to_string(responses.size()) + " labels for " +
                        std::to_string(requests.size()) + " requests");
  std::set<int64_t> asked;
  for (const auto &r : requests) asked.insert(r.id);
  for (auto &resp : responses) {
    if (!asked.erase(resp.id))
      throw ContractError("oracle answered an id it was not asked about");
    resp.relation = normalize_label(resp.relation);
    relations.add(resp.relation, iteration);
  }
  return responses;
}

std::vector<LabelResponse> GoldOracle::label(const std::vector<LabelRequest> &requests,
                                             int, const RelationSet &) {
  std::vector<LabelResponse> out;
  out.reserve(requests.size());
  for (const auto &req : requests) {
    auto row = ds_.index_of(req.id);
    if (!row) throw ContractError("gold oracle: unknown id " + std::to_string(req.id));
    const auto &g = label_of(*row);
    if (!g) throw ContractError("gold oracle: instance " + std::to_string(req.id) +
                                " has no gold label");
    out.push_back({req.id, *g});
  }
  return out;
}

namespace {

void print_neighbors(std::ostream &out, const char *title,
                     const std::vector<Neighbor> &nbs) {
  if (nbs.empty()) return;
  out << "  " << title << ":\n";
  for (const auto &n : nbs) {
    out << "    #" << n.id << "  d=" << n.distance;
    if (n.label) out << "  [" << *n.label << "]";
    out << '\n';
  }
}

}  // namespace

std::vector<LabelResponse> ConsoleOracle::label(const std::vector<LabelRequest> &requests,
                                                int iteration, const RelationSet &known) {
  partial_.clear();
  std::vector<std::string> listed = known.names();
  for (size_t k = 0; k < requests.size(); ++k) {
    const auto &req = requests[k];
    out_ << "\n[iteration " << iteration << ", " << (k + 1) << "/" << requests.size()
         << "] instance #" << req.id << '\n';
    if (!req.text.empty()) out_ << "  " << req.text << '\n';
    print_neighbors(out_, "labeled neighbors", req.labeled_neighbors);
    print_neighbors(out_, "unlabeled neighbors", req.unlabeled_neighbors);
    if (!listed.empty()) {
      out_ << "  relations:";
      for (size_t i = 0; i < listed.size(); ++i) out_ << ' ' << (i + 1) << ")" << listed[i];
      out_ << '\n';
    }
    std::string answer;
    for (;;) {
      out_ << "label> " << std::flush;
      std::string line;
      if (!std::getline(in_, line))
        throw OracleUnavailable("console input closed before the batch was labeled");
      try {
        answer = normalize_label(line);
      } catch (const ContractError &) {
        continue;
      }
      if (std::all_of(answer.begin(), answer.end(), ::isdigit)) {
        const size_t pick = std::stoul(answer);
        if (pick >= 1 && pick <= listed.size()) {
          answer = listed[pick - 1];
        } else {
          out_ << "  no relation numbered " << answer << '\n';
          continue;
        }
      }
      break;
    }
    if (std::find(listed.begin(), listed.end(), answer) == listed.end())
      listed.push_back(answer);
    partial_.push_back({req.id, answer});
  }
  return partial_;
}

std::string to_string(SubmitStatus s) {
  switch (s) {
    case SubmitStatus::kAccepted: return "accepted";
    case SubmitStatus::kDuplicate: return "duplicate";
    case SubmitStatus::kNotPending: return "not_pending";
    case SubmitStatus::kAlreadyLabeled: return "already_labeled";
    case SubmitStatus::kEmptyRelation: return "empty_relation";
  }
  return "?";
}

void AnnotationQueue::open_batch(int iteration, std::vector<LabelRequest> requests,
                                 const RelationSet &known) {
  std::lock_guard<std::mutex> lock(mu_);
  if (cancelled_) throw OracleUnavailable("annotation queue is shut down");
  open_ = true;
  iteration_ = iteration;
  requests_ = std::move(requests);
  received_.clear();
  relations_ = known;
}

bool AnnotationQueue::complete_locked() const {
  return received_.size() == requests_.size();
}

std::optional<std::vector<LabelResponse>> AnnotationQueue::wait_complete(
    std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mu_);
  const bool done = cv_.wait_for(lock, timeout,
                                 [&] { return cancelled_ || complete_locked(); });
  if (!done || !complete_locked()) return std::nullopt;
  return received_;
}

std::vector<LabelResponse> AnnotationQueue::received() const {
  std::lock_guard<std::mutex> lock(mu_);
  return received_;
}

void AnnotationQueue::close_batch() {
  std::lock_guard<std::mutex> lock(mu_);
  open_ = false;
  requests_.clear();
  received_.clear();
}

void AnnotationQueue::cancel() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    cancelled_ = true;
  }
  cv_.notify_all();
}

SubmitResult AnnotationQueue::submit(int64_t id, const std::string &raw_relation) {
  SubmitResult result;
  std::string relation;
  try {
    relation = normalize_label(raw_relation);
  } catch (const ContractError &) {
    result.status = SubmitStatus::kEmptyRelation;
    return result;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    result.relation = relation;
    auto prior = labeled_.find(id);
    if (prior != labeled_.end()) {
      result.status = prior->second == relation ? SubmitStatus::kDuplicate
                                                : SubmitStatus::kAlreadyLabeled;
      result.relation = prior->second;
      result.remaining = open_ ? requests_.size() - received_.size() : 0;
      return result;
    }
    const bool pending = open_ && std::any_of(requests_.begin(), requests_.end(),
                                              [&](const LabelRequest &r) { return r.id == id; });
    if (!pending) {
      result.status = SubmitStatus::kNotPending;
      result.remaining = open_ ? requests_.size() - received_.size() : 0;
      return result;
    }
    labeled_.emplace(id, relation);
    received_.push_back({id, relation});
    result.new_relation = relations_.add(relation, iteration_);
    result.status = SubmitStatus::kAccepted;
    result.remaining = requests_.size() - received_.size();
  }
  cv_.notify_all();
  return result;
}

std::vector<LabelRequest> AnnotationQueue::pending() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<LabelRequest> out;
  if (!open_) return out;
  for (const auto &r : requests_)
    if (!labeled_.count(r.id)) out.push_back(r);
  return out;
}

RelationSet AnnotationQueue::relations() const {
  std::lock_guard<std::mutex> lock(mu_);
  return relations_;
}

bool AnnotationQueue::batch_open() const {
  std::lock_guard<std::mutex> lock(mu_);
  return open_;
}

int AnnotationQueue::iteration() const {
  std::lock_guard<std::mutex> lock(mu_);
  return iteration_;
}

size_t AnnotationQueue::total_labeled() const {
  std::lock_guard<std::mutex> lock(mu_);
  return labeled_.size();
}

std::vector<LabelResponse> QueueOracle::label(const std::vector<LabelRequest> &requests,
                                              int iteration, const RelationSet &known) {
  partial_.clear();
  queue_.open_batch(iteration, requests, known);
  auto done = queue_.wait_complete(timeout_);
  if (!done) {
    partial_ = queue_.received();
    queue_.close_batch();
    throw OracleUnavailable("timed out waiting for " +
                            std::to_string(requests.size() - partial_.size()) +
                            " labels");
  }
  queue_.close_batch();
  return *done;
}

}  // namespace relclust
