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

#include "relclust/service.hpp"

#include <thread>

#include "httplib.h"
#include "relclust/errors.hpp"
#include "relclust/report.hpp"

namespace relclust {

namespace {

using json = nlohmann::json;

json neighbor_json(const Neighbor &n) {
  json j = {{"id", n.id}, {"distance", n.distance}};
  j["label"] = n.label ? json(*n.label) : json(nullptr);
  return j;
}

json error_body(const std::string &reason, const std::string &detail) {
  return {{"status", "rejected"}, {"reason", reason}, {"detail", detail}};
}

void reply(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

}  // namespace

json session_json(const AnnotationQueue &queue, const RunMonitor &monitor) {
  const auto snap = monitor.snapshot();
  const bool open = queue.batch_open();
  const size_t in_batch = open ? queue.received().size() : 0;
  return {{"status", snap.status},
          {"iteration", snap.iteration},
          {"strategy", to_string(snap.strategy)},
          {"budget", snap.budget},
          {"per_round", snap.per_round},
          {"budget_used", snap.total_labeled + int(in_batch)},
          {"batch_open", open},
          {"pending", open ? queue.pending().size() : 0}};
}

json pending_json(const AnnotationQueue &queue) {
  json items = json::array();
  for (const auto &req : queue.pending()) {
    json item = {{"id", req.id}, {"text", req.text}};
    item["labeled_neighbors"] = json::array();
    item["unlabeled_neighbors"] = json::array();
    json suggested = json::array();
    for (const auto &n : req.labeled_neighbors) {
      item["labeled_neighbors"].push_back(neighbor_json(n));
      if (n.label && std::find(suggested.begin(), suggested.end(), *n.label) == suggested.end())
        suggested.push_back(*n.label);
    }
    for (const auto &n : req.unlabeled_neighbors)
      item["unlabeled_neighbors"].push_back(neighbor_json(n));
    item["suggested"] = suggested;
    items.push_back(item);
  }
  return {{"iteration", queue.iteration()}, {"batch_open", queue.batch_open()}, {"items", items}};
}

json relations_json(const AnnotationQueue &queue, const RunMonitor &monitor) {
  // The queue sees submissions first; the engine's history covers runs that
  // have not opened a batch yet.
  const RelationSet rel = queue.relations();
  json out = json::array();
  for (size_t i = 0; i < rel.size(); ++i)
    out.push_back({{"name", rel.names()[i]}, {"first_seen", rel.first_seen_at(i)}});
  return {{"relations", out}, {"iteration", monitor.snapshot().iteration}};
}

json metrics_json(const RunMonitor &monitor) {
  json history = json::array();
  for (const auto &rec : monitor.snapshot().history) history.push_back(to_json(rec));
  return {{"history", history}};
}

LabelReply handle_label(AnnotationQueue &queue, const std::string &body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception &) {
    return {400, error_body("malformed", "body is not valid JSON")};
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() ||
      !j.contains("relation") || !j["relation"].is_string())
    return {400, error_body("malformed", "expected {\"id\": integer, \"relation\": string}")};

  const SubmitResult r = queue.submit(j["id"].get<int64_t>(), j["relation"].get<std::string>());
  json ack = {{"status", to_string(r.status)},
              {"id", j["id"]},
              {"relation", r.relation},
              {"new_relation", r.new_relation},
              {"remaining", r.remaining}};
  switch (r.status) {
    case SubmitStatus::kAccepted:
    case SubmitStatus::kDuplicate:
      return {200, ack};
    case SubmitStatus::kEmptyRelation:
      return {400, error_body(to_string(r.status), "relation name is empty")};
    case SubmitStatus::kNotPending:
      return {409, error_body(to_string(r.status), "id is not in the pending batch")};
    case SubmitStatus::kAlreadyLabeled:
      return {409, error_body(to_string(r.status), "id already carries a different relation")};
  }
  return {500, error_body("internal", "unknown submit status")};
}

struct AnnotationService::Impl {
  httplib::Server server;
  std::thread thread;
};

AnnotationService::AnnotationService(AnnotationQueue &queue, const RunMonitor &monitor,
                                     std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto &srv = impl_->server;
  srv.Get("/api/session", [&queue, &monitor](const httplib::Request &, httplib::Response &res) {
    reply(res, 200, session_json(queue, monitor));
  });
  srv.Get("/api/pending", [&queue](const httplib::Request &, httplib::Response &res) {
    reply(res, 200, pending_json(queue));
  });
  srv.Post("/api/label", [&queue](const httplib::Request &req, httplib::Response &res) {
    const LabelReply r = handle_label(queue, req.body);
    reply(res, r.http_status, r.body);
  });
  srv.Get("/api/relations", [&queue, &monitor](const httplib::Request &, httplib::Response &res) {
    reply(res, 200, relations_json(queue, monitor));
  });
  srv.Get("/api/metrics", [&monitor](const httplib::Request &, httplib::Response &res) {
    reply(res, 200, metrics_json(monitor));
  });
  if (!static_dir.empty() && !srv.set_mount_point("/", static_dir.string()))
    throw IoError("static directory not found: " + static_dir.string());
}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::start(const std::string &host, int port) {
  auto &srv = impl_->server;
  if (port == 0) {
    port_ = srv.bind_to_any_port(host);
  } else {
    port_ = srv.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  return port_;
}

void AnnotationService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace relclust
