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

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"
#include "relclust/engine.hpp"
#include "relclust/oracle.hpp"

namespace relclust {

// JSON bodies behind each endpoint, usable without a socket.
nlohmann::json session_json(const AnnotationQueue &queue, const RunMonitor &monitor);
nlohmann::json pending_json(const AnnotationQueue &queue);
nlohmann::json relations_json(const AnnotationQueue &queue, const RunMonitor &monitor);
nlohmann::json metrics_json(const RunMonitor &monitor);

struct LabelReply {
  int http_status = 200;
  nlohmann::json body;
};

// Handles a POST /api/label body: {"id": int, "relation": string}.
LabelReply handle_label(AnnotationQueue &queue, const std::string &body);

// HTTP front end for a run driven by a QueueOracle.
//   GET  /api/session    run status, iteration and budget use
//   GET  /api/pending    open batch with neighbor context
//   POST /api/label      submit {id, relation}
//   GET  /api/relations  discovered relations with first-seen iteration
//   GET  /api/metrics    per-iteration history
// Anything else is served from `static_dir` when one is given.
class AnnotationService {
 public:
  AnnotationService(AnnotationQueue &queue, const RunMonitor &monitor,
                    std::filesystem::path static_dir = {});
  ~AnnotationService();
  AnnotationService(const AnnotationService &) = delete;
  AnnotationService &operator=(const AnnotationService &) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Returns the bound port; throws IoError when binding fails.
  int start(const std::string &host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace relclust
