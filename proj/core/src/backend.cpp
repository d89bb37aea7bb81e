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

#include "viva/backend.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <thread>

#include "viva/codec.hpp"
#include "viva/io.hpp"
#include "viva/stable_hash.hpp"

namespace viva {
namespace {

std::int64_t word_count(std::string_view s) {
  std::int64_t n = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::vector<std::string> string_or_list(ObjectReader& r, std::string_view key) {
  const Json* v = r.optional_value(key);
  if (!v) return {};
  if (v->is_string()) return {v->get<std::string>()};
  return ObjectReader::convert<std::vector<std::string>>(*v, r.path(key));
}

MockRule decode_rule(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  MockRule rule;
  rule.hash = r.get_optional<std::string>("hash");
  rule.contains = string_or_list(r, "contains");
  rule.last_contains = string_or_list(r, "last_contains");
  rule.responses = string_or_list(r, "response");
  for (auto& extra : string_or_list(r, "responses")) rule.responses.push_back(std::move(extra));
  rule.fail = r.get_optional<std::string>("fail");
  rule.fail_count = r.get_optional<int>("fail_count");
  const bool any = r.get_or<bool>("any", false);
  r.finish();
  if (!any && !rule.hash && rule.contains.empty() && rule.last_contains.empty()) {
    throw SchemaError(path, "rule needs hash, contains, last_contains or \"any\": true");
  }
  if (rule.responses.empty() && !rule.fail) {
    throw SchemaError(path, "rule needs response(s) or fail");
  }
  if (rule.fail_count && (!rule.fail || rule.responses.empty() || *rule.fail_count < 0)) {
    throw SchemaError(path + ".fail_count", "needs fail, response(s) and a non-negative count");
  }
  if (rule.fail) {
    static const std::set<std::string> kFailures{"transport", "timeout", "http_500", "http_400"};
    if (!kFailures.contains(*rule.fail)) {
      throw SchemaError(path + ".fail", "unknown failure '" + *rule.fail + "'");
    }
  }
  return rule;
}

bool rule_matches(const MockRule& rule, const CompletionRequest& request,
                  const std::string& rendered, const std::string& hash) {
  if (rule.hash && *rule.hash != hash) return false;
  for (const auto& s : rule.contains) {
    if (rendered.find(s) == std::string::npos) return false;
  }
  if (!rule.last_contains.empty()) {
    if (request.messages.empty()) return false;
    const auto& last = request.messages.back().text;
    for (const auto& s : rule.last_contains) {
      if (last.find(s) == std::string::npos) return false;
    }
  }
  return true;
}

std::string capture_file_stem(const std::string& tag) {
  std::string out;
  for (char c : tag) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "call" : out;
}

}  // namespace

std::string render_prompt(const CompletionRequest& request) {
  std::string out;
  for (const auto& m : request.messages) {
    out += m.role;
    out += '\n';
    out += m.text;
    out += "\n\n";
  }
  return out;
}

std::string prompt_hash(const CompletionRequest& request) {
  return hex64(fnv1a64(render_prompt(request)));
}

MockScripts parse_mock_scripts(const Json& doc) {
  const Json body = strip_version(doc, "mock_script");
  ObjectReader r(body, "");
  MockScripts scripts;
  const Json& backends = r.value("backends");
  ObjectReader br(backends, "backends");
  for (auto it = backends.begin(); it != backends.end(); ++it) {
    const std::string where = br.path(it.key());
    ObjectReader sr(br.value(it.key()), where);
    MockScript script;
    for_each_element(sr.value("rules"), sr.path("rules"),
                     [&](const Json& e, const std::string& p) {
                       script.rules.push_back(decode_rule(e, p));
                     });
    sr.finish();
    scripts.emplace(it.key(), std::move(script));
  }
  br.finish();
  r.finish();
  return scripts;
}

MockScripts load_mock_scripts(const std::filesystem::path& file) {
  return parse_mock_scripts(parse_json(read_file(file), file.string()));
}

MockBackend::MockBackend(BackendSpec spec, MockScript script)
    : spec_(std::move(spec)), script_(std::move(script)), matches_(script_.rules.size(), 0) {}

std::size_t MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
  const std::string rendered = render_prompt(request);
  const std::string hash = hex64(fnv1a64(rendered));
  std::lock_guard lock(mu_);
  ++calls_;
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const MockRule& rule = script_.rules[i];
    if (!rule_matches(rule, request, rendered, hash)) continue;
    const std::size_t ordinal = matches_[i]++;
    if (rule.fail && (!rule.fail_count || ordinal < static_cast<std::size_t>(*rule.fail_count))) {
      const std::string msg = "mock " + spec_.rater_id + ": scripted " + *rule.fail;
      if (*rule.fail == "transport") throw BackendError(BackendError::Kind::transport, spec_.rater_id, msg);
      if (*rule.fail == "timeout") throw BackendError(BackendError::Kind::timeout, spec_.rater_id, msg);
      const int status = *rule.fail == "http_500" ? 500 : 400;
      throw BackendError(BackendError::Kind::http_status, spec_.rater_id, msg, status);
    }
    CompletionResponse resp;
    resp.rater_id = spec_.rater_id;
    const std::size_t served = rule.fail_count ? ordinal - static_cast<std::size_t>(*rule.fail_count) : ordinal;
    resp.text = rule.responses[std::min(served, rule.responses.size() - 1)];
    if (resp.text.empty()) {
      throw BackendError(BackendError::Kind::bad_response, spec_.rater_id,
                         "mock " + spec_.rater_id + ": scripted empty response");
    }
    resp.usage = {word_count(rendered), word_count(resp.text)};
    return resp;
  }
  throw BackendError(BackendError::Kind::script_miss, spec_.rater_id,
                     "mock " + spec_.rater_id + ": no script entry for prompt hash " + hash);
}

CompletionResponse complete_with_retry(ModelBackend& backend, const CompletionRequest& request,
                                       const RetryPolicy& policy) {
  auto delay = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return backend.complete(request);
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= policy.max_attempts) throw;
    }
    std::this_thread::sleep_for(delay);
    delay = std::chrono::milliseconds(
        static_cast<std::int64_t>(static_cast<double>(delay.count()) * policy.multiplier));
  }
}

CaptureLog::CaptureLog(std::filesystem::path directory) : directory_(std::move(directory)) {}

void CaptureLog::record(CaptureEntry entry) {
  std::lock_guard lock(mu_);
  if (directory_) {
    const std::string stem = capture_file_stem(entry.tag);
    const int use = ++tag_uses_[stem];
    const std::string name = use == 1 ? stem : stem + "." + std::to_string(use);
    write_file_atomic(*directory_ / (name + ".json"), canonical_dump(encode(entry)));
  }
  entries_.push_back(std::move(entry));
}

std::vector<CaptureEntry> CaptureLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t CaptureLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Json encode(const CaptureEntry& e) {
  Json messages = Json::array();
  for (const auto& m : e.request.messages) messages.push_back({{"role", m.role}, {"text", m.text}});
  Json j = {{"tag", e.tag},
            {"rater_id", e.rater_id},
            {"prompt_hash", prompt_hash(e.request)},
            {"messages", messages},
            {"error", e.error}};
  if (e.response) {
    j["response"] = {{"text", e.response->text},
                     {"input_units", e.response->usage.input_units},
                     {"output_units", e.response->usage.output_units},
                     {"latency_ms", e.response->latency_ms}};
  } else {
    j["response"] = nullptr;
  }
  return j;
}

CompletionResponse CapturingBackend::complete(const CompletionRequest& request) {
  CaptureEntry entry{request.tag, inner_.spec().rater_id, request, std::nullopt, {}};
  try {
    auto resp = inner_.complete(request);
    entry.response = resp;
    log_.record(std::move(entry));
    return resp;
  } catch (const BackendError& e) {
    entry.error = e.what();
    log_.record(std::move(entry));
    throw;
  }
}

CostSummary usage_ledger(const std::vector<CompletionResponse>& responses,
                         const std::vector<BackendSpec>& specs) {
  std::map<std::string, const BackendSpec*> by_id;
  for (const auto& s : specs) by_id[s.rater_id] = &s;
  CostSummary summary;
  for (const auto& r : responses) {
    auto it = by_id.find(r.rater_id);
    if (it == by_id.end() || !it->second->price) {
      throw ConfigError("no unit price configured for backend '" + r.rater_id + "'");
    }
    const UnitPrice& price = *it->second->price;
    auto& cost = summary.per_backend[r.rater_id];
    const std::int64_t c =
        r.usage.input_units * price.input_micro + r.usage.output_units * price.output_micro;
    cost.input_units += r.usage.input_units;
    cost.output_units += r.usage.output_units;
    cost.cost_micro += c;
    summary.total_micro += c;
  }
  return summary;
}

Json encode(const BackendSpec& s) {
  Json j = {{"rater_id", s.rater_id},
            {"family_label", s.family_label},
            {"kind", s.kind == BackendKind::mock ? "mock" : "http"},
            {"base_url", s.base_url},
            {"path", s.path},
            {"model", s.model},
            {"api_key_env", s.api_key_env},
            {"temperature", s.temperature},
            {"max_output_tokens", s.max_output_tokens},
            {"timeout_seconds", s.timeout_seconds},
            {"is_chair", s.is_chair}};
  if (s.price) {
    j["price"] = {{"input_micro", s.price->input_micro}, {"output_micro", s.price->output_micro}};
  }
  return j;
}

BackendSpec decode_backend_spec(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  BackendSpec s;
  s.rater_id = r.get<std::string>("rater_id");
  s.family_label = r.get_or<std::string>("family_label", "");
  const auto kind = r.get_or<std::string>("kind", "mock");
  if (kind == "mock") {
    s.kind = BackendKind::mock;
  } else if (kind == "http") {
    s.kind = BackendKind::http;
  } else {
    throw SchemaError(r.path("kind"), "expected \"mock\" or \"http\"");
  }
  s.base_url = r.get_or<std::string>("base_url", "");
  s.path = r.get_or<std::string>("path", s.path);
  s.model = r.get_or<std::string>("model", "");
  s.api_key_env = r.get_or<std::string>("api_key_env", "");
  s.temperature = r.get_or<double>("temperature", 0.0);
  s.max_output_tokens = r.get_or<int>("max_output_tokens", s.max_output_tokens);
  s.timeout_seconds = r.get_or<int>("timeout_seconds", s.timeout_seconds);
  s.is_chair = r.get_or<bool>("is_chair", false);
  if (const Json* p = r.optional_value("price")) {
    ObjectReader pr(*p, r.path("price"));
    s.price = UnitPrice{pr.get<std::int64_t>("input_micro"), pr.get<std::int64_t>("output_micro")};
    pr.finish();
  }
  r.finish();
  if (s.rater_id.empty()) throw SchemaError(r.path("rater_id"), "must be non-empty");
  if (s.kind == BackendKind::http && s.base_url.empty()) {
    throw SchemaError(r.path("base_url"), "required for http backends");
  }
  return s;
}

BackendConfig decode_backend_config(const Json& doc) {
  const Json body = strip_version(doc, "backends");
  ObjectReader r(body, "");
  BackendConfig config;
  if (const Json* e = r.optional_value("examiner")) {
    config.examiner = decode_backend_spec(*e, "examiner");
  }
  if (const Json* c = r.optional_value("council")) {
    for_each_element(*c, "council", [&](const Json& e, const std::string& p) {
      config.council.push_back(decode_backend_spec(e, p));
    });
  }
  r.finish();
  return config;
}

BackendConfig load_backend_config(const std::filesystem::path& file) {
  return decode_backend_config(parse_json(read_file(file), file.string()));
}

void validate_council(const std::vector<BackendSpec>& specs) {
  if (specs.size() < 3) throw ConfigError("council needs at least 3 backends");
  std::set<std::string> families;
  std::set<std::string> ids;
  int chairs = 0;
  for (const auto& s : specs) {
    if (s.family_label.empty()) {
      throw ConfigError("backend '" + s.rater_id + "' has no family_label");
    }
    if (!families.insert(s.family_label).second) {
      throw ConfigError("council family_label '" + s.family_label + "' is not unique");
    }
    if (!ids.insert(s.rater_id).second) {
      throw ConfigError("council rater_id '" + s.rater_id + "' is not unique");
    }
    if (s.is_chair) ++chairs;
  }
  if (chairs != 1) throw ConfigError("council needs exactly one chair (found " + std::to_string(chairs) + ")");
}

std::unique_ptr<ModelBackend> make_backend(const BackendSpec& spec, const MockScripts* scripts) {
  if (scripts) {
    auto it = scripts->find(spec.rater_id);
    return std::make_unique<MockBackend>(spec, it == scripts->end() ? MockScript{} : it->second);
  }
  if (spec.kind == BackendKind::mock) return std::make_unique<MockBackend>(spec, MockScript{});
  return std::make_unique<HttpBackend>(spec);
}

}  // namespace viva
