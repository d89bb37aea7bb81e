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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "viva/errors.hpp"
#include "viva/json_reader.hpp"

namespace viva {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string text;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  // Capture-file label such as "r1.claude.a1". Never sent to a model.
  std::string tag;
};

struct Usage {
  std::int64_t input_units = 0;
  std::int64_t output_units = 0;
};

struct CompletionResponse {
  std::string rater_id;
  std::string text;
  Usage usage;
  std::int64_t latency_ms = 0;
};

enum class BackendKind { mock, http };

struct UnitPrice {
  std::int64_t input_micro = 0;   // micro-units per input unit
  std::int64_t output_micro = 0;  // micro-units per output unit
};

struct BackendSpec {
  std::string rater_id;
  std::string family_label;
  BackendKind kind = BackendKind::mock;
  std::string base_url;                      // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;                   // empty: no Authorization header
  double temperature = 0.0;
  int max_output_tokens = 1024;
  int timeout_seconds = 60;
  bool is_chair = false;
  std::optional<UnitPrice> price;
};

class BackendError : public Error {
 public:
  enum class Kind { transport, timeout, http_status, auth, bad_response, script_miss };

  BackendError(Kind kind, std::string rater_id, const std::string& message, int status = 0)
      : Error(message), kind_(kind), rater_id_(std::move(rater_id)), status_(status) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& rater_id() const noexcept { return rater_id_; }
  int status() const noexcept { return status_; }
  /// Transport failures, timeouts and 5xx responses.
  bool retryable() const noexcept {
    return kind_ == Kind::transport || kind_ == Kind::timeout ||
           (kind_ == Kind::http_status && status_ >= 500);
  }

 private:
  Kind kind_;
  std::string rater_id_;
  int status_;
};

/// A text-generation backend. Implementations must be callable concurrently.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual const BackendSpec& spec() const = 0;
  /// Throws BackendError.
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

/// The exact text a mock keys on: each message as "<role>\n<text>\n\n".
std::string render_prompt(const CompletionRequest& request);
/// hex FNV-1a 64 of render_prompt(request).
std::string prompt_hash(const CompletionRequest& request);

/// Scripted responses for one mock backend. Rules are tried in order; the
/// first whose conditions all hold answers. A rule answers its n-th match
/// with responses[n], repeating the last response once exhausted.
struct MockRule {
  std::optional<std::string> hash;           // prompt_hash equality
  std::vector<std::string> contains;         // substrings of the rendered prompt
  std::vector<std::string> last_contains;    // substrings of the final message
  std::vector<std::string> responses;
  // Simulated failure instead of a response: "transport", "timeout",
  // "http_500", "http_400".
  std::optional<std::string> fail;
  // With `fail`: fail only the first N matches, then answer from responses.
  std::optional<int> fail_count;
};

struct MockScript {
  std::vector<MockRule> rules;
};

/// Mock scripts keyed by rater_id, from a `--mock-script` file:
/// {"v":1,"backends":{"<rater_id>":{"rules":[...]}}}.
using MockScripts = std::map<std::string, MockScript>;
MockScripts parse_mock_scripts(const Json& doc);
MockScripts load_mock_scripts(const std::filesystem::path& file);

class MockBackend final : public ModelBackend {
 public:
  MockBackend(BackendSpec spec, MockScript script);
  const BackendSpec& spec() const override { return spec_; }
  CompletionResponse complete(const CompletionRequest& request) override;
  /// Number of complete() calls served so far (hits and misses).
  std::size_t calls() const;

 private:
  BackendSpec spec_;
  MockScript script_;
  mutable std::mutex mu_;
  std::vector<std::size_t> matches_;
  std::size_t calls_ = 0;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend final : public ModelBackend {
 public:
  explicit HttpBackend(BackendSpec spec);
  const BackendSpec& spec() const override { return spec_; }
  CompletionResponse complete(const CompletionRequest& request) override;

  /// Request body sent to the provider.
  Json request_body(const CompletionRequest& request) const;

 private:
  BackendSpec spec_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;

  friend bool operator==(const RetryPolicy&, const RetryPolicy&) = default;
};

/// Calls backend.complete, retrying retryable errors with exponential
/// backoff. Rethrows the last error once attempts are exhausted.
CompletionResponse complete_with_retry(ModelBackend& backend, const CompletionRequest& request,
                                       const RetryPolicy& policy = {});

struct CaptureEntry {
  std::string tag;
  std::string rater_id;
  CompletionRequest request;
  std::optional<CompletionResponse> response;
  std::string error;
};

/// Append-only record of every request and response. With a directory, each
/// call is also written to its own file named after the request tag.
class CaptureLog {
 public:
  CaptureLog() = default;
  explicit CaptureLog(std::filesystem::path directory);

  void record(CaptureEntry entry);
  std::vector<CaptureEntry> entries() const;
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> directory_;
  mutable std::mutex mu_;
  std::vector<CaptureEntry> entries_;
  std::map<std::string, int> tag_uses_;
};

Json encode(const CaptureEntry& e);

/// Tees every call of `inner` into `log`.
class CapturingBackend final : public ModelBackend {
 public:
  CapturingBackend(ModelBackend& inner, CaptureLog& log) : inner_(inner), log_(log) {}
  const BackendSpec& spec() const override { return inner_.spec(); }
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  ModelBackend& inner_;
  CaptureLog& log_;
};

struct BackendCost {
  std::int64_t input_units = 0;
  std::int64_t output_units = 0;
  std::int64_t cost_micro = 0;
};

struct CostSummary {
  std::map<std::string, BackendCost> per_backend;
  std::int64_t total_micro = 0;
};

/// Cost per rater_id from recorded usage. Throws ConfigError naming the
/// backend when a response comes from a backend with no configured price.
CostSummary usage_ledger(const std::vector<CompletionResponse>& responses,
                         const std::vector<BackendSpec>& specs);

struct BackendConfig {
  std::optional<BackendSpec> examiner;
  std::vector<BackendSpec> council;
};

Json encode(const BackendSpec& spec);
BackendSpec decode_backend_spec(const Json& j, const std::string& path);
BackendConfig decode_backend_config(const Json& doc);
BackendConfig load_backend_config(const std::filesystem::path& file);

/// At least three specs, pairwise-distinct family labels and rater ids,
/// exactly one chair. Throws ConfigError.
void validate_council(const std::vector<BackendSpec>& specs);

/// Builds a backend for `spec`. With `scripts`, every backend is a mock
/// driven by the script registered under its rater_id (an empty script when
/// none is registered).
std::unique_ptr<ModelBackend> make_backend(const BackendSpec& spec,
                                           const MockScripts* scripts = nullptr);

}  // namespace viva
