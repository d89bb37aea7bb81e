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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "viva/backend.hpp"
#include "viva/case_selector.hpp"
#include "viva/errors.hpp"
#include "viva/model.hpp"
#include "viva/prompt_template.hpp"
#include "viva/turn_guard.hpp"

namespace viva {

/// Operation not allowed in the session's current state (ended, suspended).
class SessionError : public Error {
 public:
  using Error::Error;
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimestampMs now() = 0;
};

class WallClock final : public Clock {
 public:
  TimestampMs now() override;
};

/// Deterministic clock: returns start, start+step, start+2*step, ...
class LogicalClock final : public Clock {
 public:
  explicit LogicalClock(TimestampMs start = 0, TimestampMs step = 1000) : next_(start), step_(step) {}
  TimestampMs now() override { return next_.fetch_add(step_); }

 private:
  std::atomic<TimestampMs> next_;
  TimestampMs step_;
};

/// Clock set explicitly by the caller (tests, simulated silence).
class ManualClock final : public Clock {
 public:
  explicit ManualClock(TimestampMs start = 0) : now_(start) {}
  TimestampMs now() override { return now_.load(); }
  void set(TimestampMs t) { now_.store(t); }
  void advance(TimestampMs delta) { now_.fetch_add(delta); }

 private:
  std::atomic<TimestampMs> now_;
};

struct SessionConfig {
  double silence_deadline_s = 10.0;
  int max_auth_attempts = 3;
  int project_budget = 6;  // examiner turns in the project phase
  int case_budget = 6;     // examiner turns in the case phase
  bool project_phase = true;
  bool case_phase = true;
  int max_regenerations = 2;
  std::optional<std::uint32_t> seed;  // default: derived from session id
  CaseCatalog catalog;
  std::set<std::string> roster;  // lowercase ids; empty accepts the session's student
  std::string nudge_text = "Are you there?";
  RetryPolicy retry;

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

/// Throws StartupError when a limit is out of range.
void validate(const SessionConfig& config);

/// One template per phase, loaded from `<dir>/{auth,project,case}.txt`.
struct ExamPrompts {
  PromptTemplate auth;
  PromptTemplate project;
  PromptTemplate case_study;

  static ExamPrompts load(const std::filesystem::path& dir);
  const PromptTemplate& for_phase(Phase p) const;
};

enum class SessionPhase { auth, project, case_study, ended };
std::string_view to_string(SessionPhase p);

struct SessionState {
  std::string session_id;
  SessionPhase phase = SessionPhase::auth;
  int auth_attempts = 0;
  ReplayCache replay;
  Transcript transcript;
  SessionConfig config;  // frozen at start, including the catalog snapshot
  std::uint32_t seed = 0;
  int turns_in_phase = 0;  // generated examiner turns in the current phase
  bool nudged = false;     // a nudge was sent for the current pending prompt
  TimestampMs awaiting_since = 0;
  bool suspended = false;
  std::string suspend_reason;

  bool ended() const { return phase == SessionPhase::ended; }
  std::optional<ExamCase> selected_case() const { return transcript.exam_case; }
  friend bool operator==(const SessionState&, const SessionState&) = default;
};

Json encode(const SessionConfig& config);
SessionConfig decode_session_config(const Json& j, const std::string& path = "");
/// Full session snapshot, persistable between turns.
Json encode(const SessionState& state);
SessionState decode_session_state(const Json& j);

struct ExaminerAction {
  enum class Kind {
    question,    // next examiner turn in the same phase
    transition,  // phase changed; carries the new phase's first turn
    replay,      // verbatim repeat of the pending question
    noted,       // system note only (clarification with nothing pending)
    end,         // session ended (completed or auth_failed)
    suspended,   // backend failure; call resume() later
  };
  Kind kind = Kind::question;
  std::vector<Turn> turns;  // turns appended by this call, excluding the student's

  const Turn* examiner_turn() const;
};

std::string_view to_string(ExaminerAction::Kind k);

/// Drives one examination: auth -> project -> case -> ended, with every phase
/// transition decided here rather than by the model. Each generated examiner
/// turn passes the turn guard before it is committed.
class ExamOrchestrator {
 public:
  ExamOrchestrator(ExamPrompts prompts, ModelBackend& examiner, Clock& clock,
                   const ClarificationPatterns* patterns = nullptr);
  /// Uses a hot-reloadable pattern file instead of a fixed pattern set.
  ExamOrchestrator(ExamPrompts prompts, ModelBackend& examiner, Clock& clock,
                   std::shared_ptr<ClarificationDetector> detector);

  /// Throws StartupError on invalid config, an empty catalog with the case
  /// phase enabled, or templates that cannot be rendered for this student.
  SessionState start_session(const StudentContext& student, const SessionConfig& config,
                             std::string session_id = {});

  ExaminerAction advance(SessionState& state, std::string_view student_text);

  /// Nudge once `elapsed_s` reaches the deadline; at most once per pending
  /// prompt. No-op for ended or suspended sessions.
  std::optional<Turn> on_silence(SessionState& state, double elapsed_s);

  /// Retries the examiner turn that suspended the session.
  ExaminerAction resume(SessionState& state);

  /// Ends the session with the given termination (any phase -> ended).
  void end_session(SessionState& state, Termination termination);

 private:
  bool is_clarification(std::string_view text);
  bool authenticate(const SessionState& state, std::string_view text) const;
  VariableMap session_variables(const SessionState& state) const;
  CompletionRequest build_request(const SessionState& state, const std::string& system_prompt) const;
  ExaminerAction generate(SessionState& state, ExaminerAction::Kind kind);
  ExaminerAction enter_next_phase(SessionState& state);
  ExaminerAction close(SessionState& state, Termination termination, std::string text);
  Turn& append(SessionState& state, Role role, std::string text, std::set<Annotation> annotations = {});
  int phase_budget(const SessionState& state) const;

  ExamPrompts prompts_;
  ModelBackend& examiner_;
  Clock& clock_;
  const ClarificationPatterns* patterns_;
  std::shared_ptr<ClarificationDetector> detector_;
};

}  // namespace viva
