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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace viva {
class StorageError;
}

namespace viva::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUserError = 1;
inline constexpr int kInternal = 2;

struct CommonPaths {
  std::string prompts = "prompts";
  std::string cases = "data/cases.json";
  std::string backends;
  std::string data = "data";
  std::string mock_script;
  std::string rubric = "data/rubric.json";
};

struct ExamOptions {
  CommonPaths paths;
  std::string student;
  std::optional<std::uint32_t> seed;
  std::string session_id;
  std::string roster;
  std::string patterns;
  std::string clock;  // logical | wall; empty picks logical with a mock script
  int project_budget = 6;
  int case_budget = 6;
  int max_auth_attempts = 3;
  double silence_deadline = 10.0;
  bool no_project = false;
  bool no_case = false;
  bool force = false;
  bool quiet = false;
};

struct GradeOptions {
  CommonPaths paths;
  std::vector<std::string> inputs;
  bool force = false;
  bool sequential = false;
  int jobs = 1;
};

struct AnalyzeOptions {
  std::string council_dir;
  std::string report;
  std::string metric = "ordinal";
};

struct SelectCaseOptions {
  std::string cases = "data/cases.json";
  std::optional<std::uint32_t> seed;
  std::string session_id;
  std::optional<std::int64_t> distribution;  // draws from a fixed mt19937
  std::uint32_t prng_seed = 20251212;
};

struct GuardOptions {
  std::string mode = "examiner";  // examiner | student
  std::string patterns;
  std::vector<std::string> texts;  // empty: read lines from stdin
};

struct AuditOptions {
  std::string data = "data";
  std::string action;  // list | show | resolve
  std::string item_id;
  std::string status;
  std::string auditor;
  std::string note;
  std::string override_file;
};

struct ServeOptions {
  CommonPaths paths;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string roster;
  std::string patterns;
  std::string clock = "wall";
  int project_budget = 6;
  int case_budget = 6;
};

struct CostOptions {
  std::string data = "data";
  std::string backends;
};

int run_exam(const ExamOptions& o, std::istream& in, std::ostream& out, std::ostream& err);
int run_grade(const GradeOptions& o, std::ostream& out, std::ostream& err);
int run_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err);
int run_select_case(const SelectCaseOptions& o, std::ostream& out, std::ostream& err);
int run_guard(const GuardOptions& o, std::istream& in, std::ostream& out, std::ostream& err);
int run_audit(const AuditOptions& o, std::ostream& out, std::ostream& err);
int run_serve(const ServeOptions& o, std::ostream& out, std::ostream& err);
int run_cost(const CostOptions& o, std::ostream& out, std::ostream& err);

/// Suffix telling the user how to get past a storage collision.
std::string storage_hint(const StorageError& e);

/// Maps library exceptions to exit codes and prints them. Used by every command.
int report_exception(std::ostream& err);

/// One lowercase id per line; '#' comments and blank lines ignored.
std::vector<std::string> read_roster(const std::string& file);

}  // namespace viva::cli
