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

#include "viva/service.hpp"

#include <algorithm>

#include <httplib.h>

#include "viva/codec.hpp"
#include "viva/io.hpp"

namespace viva {
namespace {

ApiResponse error(int status, std::string_view kind, const std::string& message, const std::string& field = {}) {
  Json e{{"kind", kind}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  return {status, {{"error", e}}};
}

int storage_status(StorageError::Kind k) {
  switch (k) {
    case StorageError::Kind::not_found: return 404;
    case StorageError::Kind::conflict:
    case StorageError::Kind::collision: return 409;
    case StorageError::Kind::invalid: return 400;
    case StorageError::Kind::corrupt: return 500;
  }
  return 500;
}

Json turns_json(const std::vector<Turn>& turns, std::size_t from = 0) {
  Json arr = Json::array();
  for (std::size_t i = from; i < turns.size(); ++i) arr.push_back(encode(turns[i]));
  return arr;
}

// Splits "/a/b/c" after `prefix` into the first segment and the remainder.
std::pair<std::string, std::string> split_segment(std::string_view rest) {
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos) return {std::string(rest), ""};
  return {std::string(rest.substr(0, slash)), std::string(rest.substr(slash + 1))};
}

Json body_json(const std::string& body) {
  if (body.empty()) return Json::object();
  return parse_json(body, "body");
}

}  // namespace

ExamApi::ExamApi(ExamOrchestrator& orchestrator, Clock& clock, Store& store, SessionConfig config)
    : orchestrator_(orchestrator), clock_(clock), store_(store), config_(std::move(config)) {}

ApiResponse ExamApi::handle(const ApiRequest& req) {
  try {
    constexpr std::string_view kSessions = "/api/sessions";
    constexpr std::string_view kAudit = "/api/audit/";
    std::string_view path = req.path;
    if (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
    if (path == kSessions) {
      if (req.method != "POST") return error(405, "method_not_allowed", "use POST");
      return create_session(body_json(req.body));
    }
    if (path.starts_with(std::string(kSessions) + "/")) {
      auto [id, tail] = split_segment(path.substr(kSessions.size() + 1));
      return session_route(id, tail, req);
    }
    if (path.starts_with(kAudit)) return audit_route(std::string(path.substr(kAudit.size())), req);
    return error(404, "not_found", "no route for " + req.path);
  } catch (const SchemaError& e) {
    return error(e.field() == "body" ? 400 : 422, "invalid", e.what(), e.field());
  } catch (const StorageError& e) {
    return error(storage_status(e.kind()), to_string(e.kind()), e.what());
  } catch (const SessionError& e) {
    return error(409, "session_state", e.what());
  } catch (const StartupError& e) {
    return error(422, "startup", e.what());
  } catch (const TemplateError& e) {
    return error(422, "template", e.what(), e.variable());
  } catch (const Error& e) {
    return error(500, "internal", e.what());
  }
}

std::shared_ptr<ExamApi::Entry> ExamApi::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw StorageError(StorageError::Kind::not_found, id, "no session " + id);
  return it->second;
}

Json ExamApi::session_view(const SessionState& s) const {
  return {{"session_id", s.session_id},
          {"phase", std::string(to_string(s.phase))},
          {"ended", s.ended()},
          {"termination", s.ended() ? Json(std::string(to_string(s.transcript.termination))) : Json(nullptr)},
          {"suspended", s.suspended},
          {"awaiting_since", s.awaiting_since},
          {"silence_deadline_s", s.config.silence_deadline_s},
          {"turn_count", s.transcript.turns.size()}};
}

void ExamApi::persist_if_ended(const SessionState& s) {
  if (s.ended()) store_.store_transcript(s.transcript);
}

ApiResponse ExamApi::create_session(const Json& body) {
  ObjectReader r(body, "");
  const StudentContext student = decode_student(r.value("student"), "student");
  auto session_id = r.get_optional<std::string>("session_id");
  SessionConfig config = config_;
  if (auto seed = r.get_optional<std::uint32_t>("seed")) config.seed = seed;
  r.finish();
  validate(student);

  auto entry = std::make_shared<Entry>();
  {
    std::lock_guard lock(mu_);
    if (!session_id) {
      do {
        session_id = student.student_id + "-" + std::to_string(next_session_++);
      } while (sessions_.contains(*session_id));
    }
    check_session_id(*session_id);
    if (sessions_.contains(*session_id) || std::filesystem::exists(store_.session_dir(*session_id) / "transcript.json")) {
      return error(409, "collision", "session " + *session_id + " already exists");
    }
    sessions_[*session_id] = entry;
  }
  std::lock_guard lock(entry->mu);
  try {
    entry->state = orchestrator_.start_session(student, config, *session_id);
  } catch (...) {
    std::lock_guard map_lock(mu_);
    sessions_.erase(*session_id);
    throw;
  }
  return {201, {{"session", session_view(entry->state)}, {"turns", turns_json(entry->state.transcript.turns)}}};
}

ApiResponse ExamApi::session_route(const std::string& id, const std::string& tail, const ApiRequest& req) {
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  SessionState& s = entry->state;
  const std::size_t before = s.transcript.turns.size();

  if (tail.empty() && req.method == "GET") {
    return {200, {{"session", session_view(s)}, {"turns", turns_json(s.transcript.turns)}}};
  }
  if (tail == "turns" && req.method == "GET") {
    std::size_t since = 0;
    if (auto it = req.query.find("since"); it != req.query.end()) {
      try {
        since = static_cast<std::size_t>(std::stoul(it->second));
      } catch (const std::exception&) {
        return error(400, "invalid", "since must be a non-negative integer", "since");
      }
    }
    return {200, {{"session", session_view(s)}, {"turns", turns_json(s.transcript.turns, since)}}};
  }
  if (req.method != "POST") return error(405, "method_not_allowed", "unsupported method");

  if (tail == "turns") {
    const Json body = body_json(req.body);
    ObjectReader r(body, "");
    const auto text = r.get<std::string>("text");
    r.finish();
    const ExaminerAction action = orchestrator_.advance(s, text);
    persist_if_ended(s);
    return {200, {{"action", std::string(to_string(action.kind))},
                  {"session", session_view(s)},
                  {"turns", turns_json(s.transcript.turns, before)}}};
  }
  if (tail == "silence-tick") {
    const double waited = static_cast<double>(clock_.now() - s.awaiting_since) / 1000.0;
    const auto nudge = orchestrator_.on_silence(s, waited);
    return {200, {{"nudged", nudge.has_value()},
                  {"seconds_waiting", waited},
                  {"session", session_view(s)},
                  {"turns", turns_json(s.transcript.turns, before)}}};
  }
  if (tail == "resume") {
    const ExaminerAction action = orchestrator_.resume(s);
    return {200, {{"action", std::string(to_string(action.kind))},
                  {"session", session_view(s)},
                  {"turns", turns_json(s.transcript.turns, before)}}};
  }
  if (tail == "end") {
    const Json body = body_json(req.body);
    ObjectReader r(body, "");
    const auto name = r.get_or<std::string>("termination", "aborted");
    r.finish();
    const auto termination = parse_termination(name);
    if (!termination) throw SchemaError("termination", "unknown termination '" + name + "'");
    orchestrator_.end_session(s, *termination);
    persist_if_ended(s);
    return {200, {{"session", session_view(s)}, {"turns", turns_json(s.transcript.turns, before)}}};
  }
  return error(404, "not_found", "no route for " + req.path);
}

ApiResponse ExamApi::audit_route(const std::string& tail, const ApiRequest& req) {
  if (tail == "queue" && req.method == "GET") {
    std::optional<AuditStatus> status;
    if (auto it = req.query.find("status"); it != req.query.end()) {
      if (it->second == "open") {
        status = AuditStatus::open;
      } else if (it->second == "resolved") {
        status = AuditStatus::resolved;
      } else {
        return error(400, "invalid", "status must be open or resolved", "status");
      }
    }
    Json items = Json::array();
    for (const auto& i : store_.queue(status)) items.push_back(encode(i));
    return {200, {{"items", items}}};
  }
  if (!tail.starts_with("items/")) return error(404, "not_found", "no audit route " + tail);
  auto [id, rest] = split_segment(std::string_view(tail).substr(6));

  if (rest.empty() && req.method == "GET") {
    const AuditItem item = store_.item(id);
    Json out{{"item", encode(item)}, {"council", encode(store_.load_council(item.council_ref))}};
    try {
      out["transcript"] = encode(store_.load_transcript(item.council_ref));
    } catch (const StorageError& e) {
      if (e.kind() != StorageError::Kind::not_found) throw;
      out["transcript"] = nullptr;
    }
    Json captures = Json::object();
    std::error_code ec;
    std::vector<std::filesystem::path> files;
    for (const auto& f : std::filesystem::directory_iterator(store_.captures_dir(item.council_ref), ec)) {
      if (f.is_regular_file()) files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      if (auto bytes = try_read_file(f)) {
        try {
          captures[f.filename().string()] = Json::parse(*bytes);
        } catch (const Json::parse_error&) {
          captures[f.filename().string()] = *bytes;
        }
      }
    }
    out["captures"] = captures;
    return {200, out};
  }
  if (rest == "resolution" && req.method == "POST") {
    AuditResolution res = decode_resolution(body_json(req.body), "");
    return {200, {{"item", encode(store_.resolve(id, std::move(res)))}}};
  }
  return error(404, "not_found", "no audit route " + tail);
}

struct ApiServer::Impl {
  explicit Impl(ExamApi& a) : api(a) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest r{req.method, req.path, {}, req.body};
      for (const auto& [k, v] : req.params) r.query[k] = v;
      const ApiResponse out = api.handle(r);
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json");
    };
    server.Get(R"(/api/.*)", handler);
    server.Post(R"(/api/.*)", handler);
  }
  ExamApi& api;
  httplib::Server server;
};

ApiServer::ApiServer(ExamApi& api) : impl_(std::make_unique<Impl>(api)) {}
ApiServer::~ApiServer() = default;

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return impl_->server.listen_after_bind(); }

void ApiServer::stop() { impl_->server.stop(); }

}  // namespace viva
