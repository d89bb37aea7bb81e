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

#include "session_fuzz.hpp"

#include <algorithm>

#include "test_support.hpp"
#include "viva/orchestrator.hpp"

namespace viva::testing {
namespace {

constexpr const char* kStacked =
    "Tighten it up for me: who is the user, and what decision do they make differently because of "
    "your product? And what is your North Star metric, plus one counter metric that might get worse "
    "if you over-optimize?";

MockScript examiner_script(Gen& g) {
  auto questions = [&](int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(g.chance(0.15) ? kStacked : g.single_question());
    return out;
  };
  MockScript script;
  MockRule ask;
  ask.last_contains = {"Ask the student for their student ID."};
  ask.responses = {"Welcome. Could you tell me your student ID?"};
  MockRule reask;
  reask.contains = {"authentication step"};
  reask.responses = {"That did not match. Could you tell me your student ID again?"};
  MockRule project;
  project.contains = {"project discussion step"};
  project.responses = questions(12);
  MockRule case_rule;
  case_rule.contains = {"case discussion step"};
  case_rule.responses = questions(12);
  script.rules = {ask, reask, project, case_rule};
  return script;
}

int rank(SessionPhase p) { return static_cast<int>(p); }

}  // namespace

FuzzOutcome run_fuzzed_session(std::uint64_t seed) {
  Gen g(seed);
  FuzzOutcome out;
  auto violation = [&](const std::string& what) {
    out.violations.push_back("seed " + std::to_string(seed) + ": " + what);
  };

  MockBackend examiner(examiner_spec(), examiner_script(g));
  ManualClock clock(0);
  ExamOrchestrator orchestrator(load_exam_prompts(), examiner, clock);

  SessionConfig config;
  config.catalog = load_cases();
  config.project_budget = g.uniform(1, 4);
  config.case_budget = g.uniform(1, 4);
  config.project_phase = g.chance(0.85);
  config.case_phase = g.chance(0.85);
  config.seed = static_cast<std::uint32_t>(g.uniform(0, 1000000));
  config.retry = {1, std::chrono::milliseconds(0), 1.0};
  const StudentContext student = load_student("s-1001");
  SessionState s = orchestrator.start_session(student, config, "fuzz-" + std::to_string(seed));

  static const std::vector<std::string> kClarify = {"Sorry, could you repeat the question?", "what?",
                                                    "pardon", "I didn't catch that."};
  static const std::vector<std::string> kWrongIds = {"s-1002", "I don't remember", "1001", "s-10011"};
  int wrong_ids = 0;
  int nudges_for_pending = 0;
  for (int step = 0; step < 80 && !s.ended(); ++step) {
    const int phase_before = rank(s.phase);
    const double roll = g.unit();
    if (roll < 0.03) {
      orchestrator.end_session(s, Termination::aborted);
    } else if (roll < 0.20) {
      clock.advance(g.uniform(0, 20000));
      const double elapsed = static_cast<double>(clock.now() - s.awaiting_since) / 1000.0;
      const bool was_nudged = s.nudged;
      const auto nudge = orchestrator.on_silence(s, elapsed);
      if (nudge) {
        ++out.nudges;
        ++nudges_for_pending;
        if (elapsed < config.silence_deadline_s) violation("nudge before the deadline");
        if (nudges_for_pending > 1) violation("second nudge for one pending question");
        if (nudge->text != config.nudge_text) violation("nudge text differs");
      } else if (elapsed >= config.silence_deadline_s && !was_nudged) {
        violation("no nudge after " + std::to_string(elapsed) + " s of silence");
      }
    } else if (roll < 0.30) {
      const std::string before = s.replay.pending_question.value_or("");
      const std::size_t calls = examiner.calls();
      const auto action = orchestrator.advance(s, g.pick(kClarify));
      if (examiner.calls() != calls) violation("clarification called the backend");
      if (action.kind == ExaminerAction::Kind::replay && action.examiner_turn()->text != before) {
        violation("replay differs from the pending question");
      }
    } else if (roll < 0.32) {
      const std::size_t turns = s.transcript.turns.size();
      try {
        orchestrator.advance(s, g.chance(0.5) ? "" : " \t");
        violation("blank turn accepted");
      } catch (const SessionError&) {
      }
      if (s.transcript.turns.size() != turns) violation("blank turn changed the transcript");
    } else {
      std::string text;
      if (s.phase == SessionPhase::auth) {
        if (g.chance(0.55)) {
          text = g.chance(0.5) ? "s-1001" : "My student ID is S-1001.";
        } else {
          text = g.pick(kWrongIds);
          ++wrong_ids;
        }
      } else {
        text = g.clause(g.uniform(1, 12)) + ".";
      }
      const auto action = orchestrator.advance(s, text);
      if (action.examiner_turn() && action.kind != ExaminerAction::Kind::replay) nudges_for_pending = 0;
    }
    if (rank(s.phase) < phase_before) violation("phase moved backwards");
    clock.advance(g.uniform(0, 3000));
  }
  if (!s.ended()) orchestrator.end_session(s, Termination::aborted);

  const Transcript& t = s.transcript;
  out.termination = t.termination;
  try {
    validate(t);
  } catch (const SchemaError& e) {
    violation(std::string("invalid transcript: ") + e.what());
  }
  for (const auto& turn : t.turns) {
    if (out.phases.empty() || out.phases.back() != turn.phase) out.phases.push_back(turn.phase);
    if (turn.role == Role::examiner && count_questions(turn.text) > 1) {
      violation("committed examiner turn " + std::to_string(turn.index) + " stacks questions");
    }
  }
  for (std::size_t i = 1; i < out.phases.size(); ++i) {
    if (out.phases[i] <= out.phases[i - 1]) violation("illegal phase sequence");
  }
  if (out.phases.empty() || out.phases.front() != Phase::auth) violation("session does not open in auth");
  if ((!config.project_phase && std::count(out.phases.begin(), out.phases.end(), Phase::project)) ||
      (!config.case_phase && std::count(out.phases.begin(), out.phases.end(), Phase::case_study))) {
    violation("disabled phase visited");
  }
  if (t.termination == Termination::completed) {
    std::vector<Phase> expected{Phase::auth};
    if (config.project_phase) expected.push_back(Phase::project);
    if (config.case_phase) expected.push_back(Phase::case_study);
    if (out.phases != expected) violation("completed without visiting every enabled phase");
  }
  if (t.termination == Termination::auth_failed) {
    if (out.phases != std::vector<Phase>{Phase::auth}) violation("auth failure left the auth phase");
    if (s.auth_attempts != config.max_auth_attempts || wrong_ids != config.max_auth_attempts) {
      violation("auth failed after " + std::to_string(wrong_ids) + " wrong ids");
    }
    if (t.turns.back().text != "I could not verify that student ID. This examination session is now closed.") {
      violation("auth failure without the closing notice");
    }
  }
  if (s.auth_attempts >= config.max_auth_attempts && t.termination != Termination::auth_failed) {
    violation("session continued after the last auth attempt");
  }
  return out;
}

}  // namespace viva::testing
