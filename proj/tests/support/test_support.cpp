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

#include "test_support.hpp"

#include <atomic>
#include <unistd.h>

#include "viva/codec.hpp"
#include "viva/io.hpp"

namespace viva::testing {

std::filesystem::path source_path(std::string_view relative) {
  return std::filesystem::path(VIVA_SOURCE_DIR) / std::filesystem::path(relative);
}

std::string read_source(std::string_view relative) { return read_file(source_path(relative)); }

Transcript load_fixture_transcript(std::string_view name) {
  return deserialize<Transcript>(read_source("fixtures/transcripts/" + std::string(name) + ".json"));
}

StudentContext load_student(std::string_view student_id) {
  return deserialize<StudentContext>(read_source("fixtures/students/" + std::string(student_id) + ".json"));
}

MockScripts load_mock(std::string_view name) {
  return load_mock_scripts(source_path("fixtures/mock/" + std::string(name) + ".json"));
}

Rubric load_rubric() { return deserialize<Rubric>(read_source("data/rubric.json")); }

GradingPrompts load_grading_prompts() { return GradingPrompts::load(source_path("prompts/grading")); }

ExamPrompts load_exam_prompts() { return ExamPrompts::load(source_path("prompts")); }

CaseCatalog load_cases() { return load_catalog(source_path("data/cases.json")); }

std::vector<BackendSpec> council_specs() {
  auto spec = [](std::string id, std::string family, bool chair, std::int64_t in, std::int64_t out) {
    BackendSpec s;
    s.rater_id = std::move(id);
    s.family_label = std::move(family);
    s.is_chair = chair;
    s.price = UnitPrice{in, out};
    return s;
  };
  return {spec("claude", "anthropic", true, 3, 15), spec("gemini", "google", false, 1, 4),
          spec("gpt", "openai", false, 1, 8)};
}

BackendSpec examiner_spec() {
  BackendSpec s;
  s.rater_id = "examiner";
  s.family_label = "openai";
  return s;
}

Assessment make_assessment(const std::string& rater, Round round, const std::array<int, 5>& scores) {
  Assessment a;
  a.rater_id = rater;
  a.round = round;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    a.scores.push_back({kDimensionIds[i], scores[i], "", {}});
    a.total += scores[i];
  }
  return a;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("viva-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

int Gen::uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

double Gen::unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

bool Gen::chance(double p) { return unit() < p; }

std::string Gen::word() {
  static const std::vector<std::string> kWords = {
      "metric",  "user",     "model",   "data",     "risk",   "cost",     "launch", "team",
      "signal",  "decision", "churn",   "price",    "market", "feature",  "test",   "control",
      "lift",    "budget",   "bias",    "fairness", "rider",  "driver",   "parent", "tutor",
      "weekly",  "counter",  "north",   "star",     "plan",   "forecast", "trade",  "value"};
  return pick(kWords);
}

std::string Gen::clause(int words) {
  std::string out;
  for (int i = 0; i < words; ++i) {
    std::string w = word();
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (i > 0) out += ' ';
    out += w;
  }
  return out;
}

std::string Gen::single_question() {
  static const std::vector<std::string> kOpeners = {
      "What", "How", "Why", "Which", "Who", "Could you explain how", "Walk me through how"};
  std::string out;
  const int statements = uniform(0, 2);
  for (int i = 0; i < statements; ++i) {
    out += clause(uniform(2, 7));
    out += chance(0.5) ? ". " : "! ";
  }
  if (chance(0.2)) out += "Thanks, that helps: ";
  out += pick(kOpeners);
  for (int i = uniform(2, 8); i > 0; --i) out += " " + word();
  // Mid-sentence marks that are not sentence-terminal.
  if (chance(0.2)) out += " (the \"why?\"-part)";
  if (chance(0.2)) out += ", e.g. 3.5x";
  out += "?";
  if (chance(0.3)) out += "  ";
  return out;
}

}  // namespace viva::testing
