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

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace viva::cli;

namespace {

void add_paths(CLI::App* cmd, CommonPaths& p, bool exam_side, bool grading_side) {
  cmd->add_option("--prompts", p.prompts, "prompt directory")->capture_default_str();
  cmd->add_option("--backends", p.backends, "backends.json");
  cmd->add_option("--data", p.data, "data directory")->capture_default_str();
  cmd->add_option("--mock-script", p.mock_script, "scripted mock responses; every backend becomes a mock");
  if (exam_side) cmd->add_option("--cases", p.cases, "case catalog")->capture_default_str();
  if (grading_side) cmd->add_option("--rubric", p.rubric, "rubric.json")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"viva: oral examinations with a grading council"};
  app.require_subcommand(1);

  ExamOptions exam;
  auto* exam_cmd = app.add_subcommand("exam", "run a text-mode examination; answers are read from stdin");
  add_paths(exam_cmd, exam.paths, true, false);
  exam_cmd->add_option("--student", exam.student, "student context JSON")->required();
  exam_cmd->add_option("--seed", exam.seed, "case-selection seed (default: derived from the session id)");
  exam_cmd->add_option("--session-id", exam.session_id, "default: the student id");
  exam_cmd->add_option("--roster", exam.roster, "file of permitted student ids");
  exam_cmd->add_option("--patterns", exam.patterns, "clarification pattern file (reloaded on change)");
  exam_cmd->add_option("--clock", exam.clock, "logical or wall (default: logical with --mock-script)");
  exam_cmd->add_option("--project-budget", exam.project_budget)->capture_default_str();
  exam_cmd->add_option("--case-budget", exam.case_budget)->capture_default_str();
  exam_cmd->add_option("--auth-attempts", exam.max_auth_attempts)->capture_default_str();
  exam_cmd->add_option("--silence-deadline", exam.silence_deadline, "seconds")->capture_default_str();
  exam_cmd->add_flag("--no-project", exam.no_project);
  exam_cmd->add_flag("--no-case", exam.no_case);
  exam_cmd->add_flag("--force", exam.force, "overwrite an existing transcript with different content");
  exam_cmd->add_flag("--quiet", exam.quiet);

  GradeOptions grade;
  auto* grade_cmd = app.add_subcommand("grade", "grade transcripts with the council");
  add_paths(grade_cmd, grade.paths, false, true);
  grade_cmd->add_option("inputs", grade.inputs, "transcript files or directories")->required();
  grade_cmd->add_option("--jobs", grade.jobs, "transcripts graded in parallel")->capture_default_str();
  grade_cmd->add_flag("--sequential", grade.sequential, "call council backends one at a time");
  grade_cmd->add_flag("--force", grade.force, "overwrite existing results with different content");

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "reliability report over council results");
  analyze_cmd->add_option("--council-dir", analyze.council_dir, "directory searched for council.json")->required();
  analyze_cmd->add_option("--report", analyze.report, "markdown output; report.json is written next to it");
  analyze_cmd->add_option("--metric", analyze.metric, "distance metric for the overall alpha")->capture_default_str();

  SelectCaseOptions select;
  auto* select_cmd = app.add_subcommand("select-case", "show the case a seed selects, or the selection distribution");
  select_cmd->add_option("--cases", select.cases)->capture_default_str();
  select_cmd->add_option("--seed", select.seed);
  select_cmd->add_option("--session-id", select.session_id);
  select_cmd->add_option("--distribution", select.distribution, "number of seeds drawn from a fixed mt19937");
  select_cmd->add_option("--prng-seed", select.prng_seed)->capture_default_str();

  GuardOptions guard;
  auto* guard_cmd = app.add_subcommand("guard", "check examiner turns or student clarification requests");
  guard_cmd->add_option("--mode", guard.mode, "examiner or student")->capture_default_str();
  guard_cmd->add_option("--patterns", guard.patterns);
  guard_cmd->add_option("texts", guard.texts, "texts to check (default: stdin lines)");

  AuditOptions audit;
  auto* audit_cmd = app.add_subcommand("audit", "inspect and resolve the human audit queue");
  audit_cmd->add_option("action", audit.action, "list | show | resolve")->required();
  audit_cmd->add_option("item", audit.item_id);
  audit_cmd->add_option("--data", audit.data)->capture_default_str();
  audit_cmd->add_option("--status", audit.status, "open or resolved");
  audit_cmd->add_option("--auditor", audit.auditor);
  audit_cmd->add_option("--note", audit.note);
  audit_cmd->add_option("--override", audit.override_file, "JSON {\"scores\":[...],\"total\":N}");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP session and audit API");
  add_paths(serve_cmd, serve.paths, true, false);
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--roster", serve.roster);
  serve_cmd->add_option("--patterns", serve.patterns);
  serve_cmd->add_option("--clock", serve.clock)->capture_default_str();
  serve_cmd->add_option("--project-budget", serve.project_budget)->capture_default_str();
  serve_cmd->add_option("--case-budget", serve.case_budget)->capture_default_str();

  CostOptions cost;
  auto* cost_cmd = app.add_subcommand("cost", "usage and cost per backend from capture files");
  cost_cmd->add_option("--data", cost.data)->capture_default_str();
  cost_cmd->add_option("--backends", cost.backends);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUserError;
  }

  if (*exam_cmd) return run_exam(exam, std::cin, std::cout, std::cerr);
  if (*grade_cmd) return run_grade(grade, std::cout, std::cerr);
  if (*analyze_cmd) return run_analyze(analyze, std::cout, std::cerr);
  if (*select_cmd) return run_select_case(select, std::cout, std::cerr);
  if (*guard_cmd) return run_guard(guard, std::cin, std::cout, std::cerr);
  if (*audit_cmd) return run_audit(audit, std::cout, std::cerr);
  if (*serve_cmd) return run_serve(serve, std::cout, std::cerr);
  if (*cost_cmd) return run_cost(cost, std::cout, std::cerr);
  return kUserError;
}
