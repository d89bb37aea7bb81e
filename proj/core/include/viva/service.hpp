// Copyright 2026 The Viva Authors.
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

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "viva/json_reader.hpp"
#include "viva/orchestrator.hpp"
#include "viva/storage.hpp"

namespace viva {

struct ApiRequest {
  std::string method;  // GET | POST
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  Json body = Json::object();
};

/// Session and audit endpoints, independent of the HTTP transport.
///
///   POST /api/sessions                       {"student":{...},"session_id"?,"seed"?}
///   GET  /api/sessions/{id}
///   POST /api/sessions/{id}/turns            {"text":"..."}
///   GET  /api/sessions/{id}/turns?since=N
///   POST /api/sessions/{id}/silence-tick     nudge decided by the server clock
///   POST /api/sessions/{id}/resume
///   POST /api/sessions/{id}/end              {"termination"?:"aborted"}
///   GET  /api/audit/queue?status=open|resolved
///   GET  /api/audit/items/{id}
///   POST /api/audit/items/{id}/resolution    {"auditor_id","override"?,"note"?}
///
/// Errors are {"error":{"kind","message","field"?}} with 400, 404, 409 or 422.
/// Ended sessions are persisted to the store.
class ExamApi {
 public:
  ExamApi(ExamOrchestrator& orchestrator, Clock& clock, Store& store, SessionConfig config);

  ApiResponse handle(const ApiRequest& request);

 private:
  struct Entry {
    std::mutex mu;
    SessionState state;
  };

  ApiResponse create_session(const Json& body);
  ApiResponse session_route(const std::string& id, const std::string& tail, const ApiRequest& request);
  ApiResponse audit_route(const std::string& tail, const ApiRequest& request);
  std::shared_ptr<Entry> find(const std::string& id);
  Json session_view(const SessionState& state) const;
  void persist_if_ended(const SessionState& state);

  ExamOrchestrator& orchestrator_;
  Clock& clock_;
  Store& store_;
  SessionConfig config_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  int next_session_ = 1;
};

/// Serves an ExamApi over HTTP on a background-capable blocking loop.
class ApiServer {
 public:
  explicit ApiServer(ExamApi& api);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds to `port` (0 picks a free port) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace viva
