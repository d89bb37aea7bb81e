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

#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "viva/backend.hpp"

namespace viva {

HttpBackend::HttpBackend(BackendSpec spec) : spec_(std::move(spec)) {}

Json HttpBackend::request_body(const CompletionRequest& request) const {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.text}});
  }
  return {{"model", spec_.model},
          {"messages", messages},
          {"temperature", spec_.temperature},
          {"max_tokens", spec_.max_output_tokens}};
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
  using Kind = BackendError::Kind;
  httplib::Headers headers;
  if (!spec_.api_key_env.empty()) {
    const char* key = std::getenv(spec_.api_key_env.c_str());
    if (!key || !*key) {
      throw BackendError(Kind::auth, spec_.rater_id,
                         "environment variable " + spec_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(spec_.base_url);
  client.set_connection_timeout(std::chrono::seconds(spec_.timeout_seconds));
  client.set_read_timeout(std::chrono::seconds(spec_.timeout_seconds));
  client.set_write_timeout(std::chrono::seconds(spec_.timeout_seconds));

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(spec_.path, headers, request_body(request).dump(), "application/json");
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
    throw BackendError(timed_out ? Kind::timeout : Kind::transport, spec_.rater_id,
                       spec_.rater_id + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(Kind::http_status, spec_.rater_id,
                       spec_.rater_id + ": HTTP " + std::to_string(res->status), res->status);
  }

  CompletionResponse out;
  out.rater_id = spec_.rater_id;
  out.latency_ms = latency;
  try {
    const Json body = Json::parse(res->body);
    out.text = body.at("choices").at(0).at("message").at("content").get<std::string>();
    if (body.contains("usage") && body["usage"].is_object()) {
      const Json& u = body["usage"];
      out.usage.input_units = u.value("prompt_tokens", std::int64_t{0});
      out.usage.output_units = u.value("completion_tokens", std::int64_t{0});
    }
  } catch (const Json::exception& e) {
    throw BackendError(Kind::bad_response, spec_.rater_id,
                       spec_.rater_id + ": unexpected response body: " + e.what());
  }
  if (out.text.empty()) {
    throw BackendError(Kind::bad_response, spec_.rater_id, spec_.rater_id + ": empty completion");
  }
  return out;
}

}  // namespace viva
