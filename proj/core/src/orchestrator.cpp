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

#include "viva/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "viva/codec.hpp"

namespace viva {
namespace {

constexpr std::string_view kAuthFailedText =
    "I could not verify that student ID. This examination session is now closed.";
constexpr std::string_view kCompletedText =
    "Thank you, that concludes the examination. Your transcript has been recorded.";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> id_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || c == '_' || c == '-') {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

Phase turn_phase(SessionPhase p, const Transcript& t) {
  switch (p) {
    case SessionPhase::auth: return Phase::auth;
    case SessionPhase::project: return Phase::project;
    case SessionPhase::case_study: return Phase::case_study;
    case SessionPhase::ended: break;
  }
  return t.turns.empty() ? Phase::auth : t.turns.back().phase;
}

std::string phase_instruction(SessionPhase p) {
  switch (p) {
    case SessionPhase::auth: return "Ask the student for their student ID.";
    case SessionPhase::project: return "Begin the project discussion. Ask your first question.";
    case SessionPhase::case_study: return "Begin the case discussion. Ask your first question.";
    case SessionPhase::ended: break;
  }
  return {};
}

}  // namespace

TimestampMs WallClock::now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void validate(const SessionConfig& c) {
  if (!(c.silence_deadline_s > 0)) throw StartupError("silence_deadline must be > 0");
  if (c.max_auth_attempts < 1) throw StartupError("max_auth_attempts must be >= 1");
  if (c.project_budget < 1) throw StartupError("project question budget must be >= 1");
  if (c.case_budget < 1) throw StartupError("case question budget must be >= 1");
  if (c.max_regenerations < 0) throw StartupError("max_regenerations must be >= 0");
  if (c.nudge_text.empty()) throw StartupError("nudge_text must be non-empty");
  if (c.case_phase && c.catalog.eligible().empty()) {
    throw StartupError("case catalog has no eligible cases but the case phase is enabled");
  }
}

ExamPrompts ExamPrompts::load(const std::filesystem::path& dir) {
  return {PromptTemplate::load(dir / "auth.txt", "auth"),
          PromptTemplate::load(dir / "project.txt", "project"),
          PromptTemplate::load(dir / "case.txt", "case")};
}

const PromptTemplate& ExamPrompts::for_phase(Phase p) const {
  switch (p) {
    case Phase::auth: return auth;
    case Phase::project: return project;
    case Phase::case_study: return case_study;
  }
  return auth;
}

std::string_view to_string(SessionPhase p) {
  switch (p) {
    case SessionPhase::auth: return "auth";
    case SessionPhase::project: return "project";
    case SessionPhase::case_study: return "case";
    case SessionPhase::ended: return "ended";
  }
  return "?";
}

std::string_view to_string(ExaminerAction::Kind k) {
  using K = ExaminerAction::Kind;
  switch (k) {
    case K::question: return "question";
    case K::transition: return "transition";
    case K::replay: return "replay";
    case K::noted: return "noted";
    case K::end: return "end";
    case K::suspended: return "suspended";
  }
  return "?";
}

const Turn* ExaminerAction::examiner_turn() const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->role == Role::examiner) return &*it;
  }
  return nullptr;
}

ExamOrchestrator::ExamOrchestrator(ExamPrompts prompts, ModelBackend& examiner, Clock& clock,
                                   const ClarificationPatterns* patterns)
    : prompts_(std::move(prompts)),
      examiner_(examiner),
      clock_(clock),
      patterns_(patterns ? patterns : &ClarificationPatterns::builtin()) {}

ExamOrchestrator::ExamOrchestrator(ExamPrompts prompts, ModelBackend& examiner, Clock& clock,
                                   std::shared_ptr<ClarificationDetector> detector)
    : prompts_(std::move(prompts)),
      examiner_(examiner),
      clock_(clock),
      patterns_(&ClarificationPatterns::builtin()),
      detector_(std::move(detector)) {}

bool ExamOrchestrator::is_clarification(std::string_view text) {
  if (detector_) return detector_->is_clarification_request(text);
  return patterns_->matches(text);
}

bool ExamOrchestrator::authenticate(const SessionState& state, std::string_view text) const {
  const std::string expected = lower(state.transcript.student.student_id);
  if (!state.config.roster.empty() && !state.config.roster.contains(expected)) return false;
  const auto tokens = id_tokens(text);
  return std::find(tokens.begin(), tokens.end(), expected) != tokens.end();
}

int ExamOrchestrator::phase_budget(const SessionState& state) const {
  switch (state.phase) {
    case SessionPhase::auth: return state.config.max_auth_attempts;
    case SessionPhase::project: return state.config.project_budget;
    case SessionPhase::case_study: return state.config.case_budget;
    case SessionPhase::ended: break;
  }
  return 0;
}

VariableMap ExamOrchestrator::session_variables(const SessionState& state) const {
  VariableMap vars = student_variables(state.transcript.student);
  vars["session_id"] = state.session_id;
  vars["phase"] = std::string(to_string(state.phase));
  vars["seed"] = std::to_string(state.seed);
  const int budget = phase_budget(state);
  vars["question_budget"] = std::to_string(budget);
  vars["questions_remaining"] = std::to_string(std::max(0, budget - state.turns_in_phase));
  vars["auth_attempts_remaining"] =
      std::to_string(std::max(0, state.config.max_auth_attempts - state.auth_attempts));
  if (const auto& c = state.transcript.exam_case) {
    vars["case_id"] = c->id;
    vars["case_title"] = c->title;
    std::string tags;
    for (const auto& t : c->topic_tags) tags += (tags.empty() ? "" : ", ") + t;
    vars["case_topics"] = tags;
  } else {
    vars["case_id"] = vars["case_title"] = vars["case_topics"] = "";
  }
  return vars;
}

Turn& ExamOrchestrator::append(SessionState& state, Role role, std::string text,
                               std::set<Annotation> annotations) {
  Turn t;
  t.index = static_cast<int>(state.transcript.turns.size());
  t.role = role;
  t.phase = turn_phase(state.phase, state.transcript);
  t.text = std::move(text);
  t.timestamp = clock_.now();
  t.annotations = std::move(annotations);
  state.transcript.turns.push_back(std::move(t));
  return state.transcript.turns.back();
}

CompletionRequest ExamOrchestrator::build_request(const SessionState& state,
                                                  const std::string& system_prompt) const {
  CompletionRequest req;
  req.messages.push_back({"system", system_prompt});
  const Phase current = turn_phase(state.phase, state.transcript);
  for (const auto& t : state.transcript.turns) {
    if (t.phase != current || t.role == Role::system) continue;
    if (t.has(Annotation::silence_nudge)) continue;
    req.messages.push_back({t.role == Role::examiner ? "assistant" : "user", t.text});
  }
  if (req.messages.size() == 1 || req.messages.back().role != "user") {
    req.messages.push_back({"user", "[orchestrator] " + phase_instruction(state.phase)});
  }
  return req;
}

SessionState ExamOrchestrator::start_session(const StudentContext& student,
                                             const SessionConfig& config, std::string session_id) {
  validate(config);
  if (student.student_id.empty()) throw StartupError("student_id must be non-empty");
  if (config.project_phase && student.project_summary.empty()) {
    throw StartupError("project_summary is required when the project phase is enabled");
  }
  SessionState s;
  s.config = config;
  s.session_id = session_id.empty() ? student.student_id : std::move(session_id);
  s.seed = config.seed ? *config.seed : seed_from_session_id(s.session_id);
  s.transcript.session_id = s.session_id;
  s.transcript.student = student;
  s.transcript.seed = s.seed;
  if (config.case_phase) {
    auto selection = select_case(s.seed, config.catalog);
    s.transcript.exam_case = std::move(selection.exam_case);
    s.transcript.case_index = selection.eligible_index;
  }
  std::set<std::string> roster;
  for (const auto& id : config.roster) roster.insert(lower(id));
  s.config.roster = std::move(roster);

  // Fail closed on templates that cannot be rendered for this session.
  const VariableMap vars = session_variables(s);
  for (Phase p : {Phase::auth, Phase::project, Phase::case_study}) {
    if ((p == Phase::project && !config.project_phase) ||
        (p == Phase::case_study && !config.case_phase)) {
      continue;
    }
    try {
      (void)render_template(prompts_.for_phase(p), vars);
    } catch (const TemplateError& e) {
      throw StartupError(std::string(to_string(p)) + " template: " + e.what());
    }
  }

  s.transcript.started_at = clock_.now();
  s.transcript.ended_at = s.transcript.started_at;
  s.phase = SessionPhase::auth;
  generate(s, ExaminerAction::Kind::question);
  return s;
}

ExaminerAction ExamOrchestrator::generate(SessionState& state, ExaminerAction::Kind kind) {
  ExaminerAction action;
  action.kind = kind;
  const std::size_t first_new = state.transcript.turns.size();
  const std::string system_prompt =
      render_template(prompts_.for_phase(turn_phase(state.phase, state.transcript)),
                      session_variables(state));
  CompletionRequest req = build_request(state, system_prompt);
  const std::string tag_base =
      "exam." + state.session_id + ".t" + std::to_string(state.transcript.turns.size());

  std::string text;
  bool accepted = false;
  const int attempts = 1 + state.config.max_regenerations;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    req.tag = tag_base + ".a" + std::to_string(attempt);
    try {
      text = complete_with_retry(examiner_, req, state.config.retry).text;
    } catch (const BackendError& e) {
      state.suspended = true;
      state.suspend_reason = e.what();
      append(state, Role::system, std::string("examiner backend unavailable, session suspended: ") + e.what());
      action.kind = ExaminerAction::Kind::suspended;
      action.turns.assign(state.transcript.turns.begin() + static_cast<std::ptrdiff_t>(first_new),
                          state.transcript.turns.end());
      return action;
    }
    const GuardVerdict verdict = validate_examiner_turn(text);
    if (verdict.accepted()) {
      accepted = true;
      break;
    }
    req.messages.push_back({"assistant", text});
    req.messages.push_back(
        {"user", "[orchestrator] Your reply was rejected (" + std::string(to_string(verdict.reason)) +
                     ", " + std::to_string(verdict.question_count) +
                     " questions). Ask exactly one question, ending with a single question mark."});
  }
  if (!accepted) {
    append(state, Role::system,
           "turn guard: regeneration budget exhausted; sending only the first question");
    text = first_question(text);
    if (blank(text)) text = "Could you tell me more about that?";
  }

  Turn& turn = append(state, Role::examiner, std::move(text));
  if (count_questions(turn.text) >= 2) turn.annotations.insert(Annotation::stacked_question);
  ++state.turns_in_phase;
  state.replay.pending_question =
      count_questions(turn.text) >= 1 ? std::optional<std::string>(turn.text) : std::nullopt;
  state.replay.clarification_count = 0;
  state.nudged = false;
  state.awaiting_since = turn.timestamp;
  state.suspended = false;
  state.suspend_reason.clear();
  action.turns.assign(state.transcript.turns.begin() + static_cast<std::ptrdiff_t>(first_new),
                      state.transcript.turns.end());
  return action;
}

ExaminerAction ExamOrchestrator::close(SessionState& state, Termination termination,
                                       std::string text) {
  ExaminerAction action;
  action.kind = ExaminerAction::Kind::end;
  action.turns.push_back(append(state, Role::examiner, std::move(text)));
  state.replay.pending_question.reset();
  state.phase = SessionPhase::ended;
  state.transcript.termination = termination;
  state.transcript.ended_at = clock_.now();
  return action;
}

ExaminerAction ExamOrchestrator::enter_next_phase(SessionState& state) {
  SessionPhase next = SessionPhase::ended;
  switch (state.phase) {
    case SessionPhase::auth:
      next = state.config.project_phase ? SessionPhase::project
             : state.config.case_phase  ? SessionPhase::case_study
                                        : SessionPhase::ended;
      break;
    case SessionPhase::project:
      next = state.config.case_phase ? SessionPhase::case_study : SessionPhase::ended;
      break;
    case SessionPhase::case_study:
    case SessionPhase::ended:
      break;
  }
  if (next == SessionPhase::ended) {
    return close(state, Termination::completed, std::string(kCompletedText));
  }
  state.phase = next;
  state.turns_in_phase = 0;
  return generate(state, ExaminerAction::Kind::transition);
}

ExaminerAction ExamOrchestrator::advance(SessionState& state, std::string_view student_text) {
  if (state.ended()) throw SessionError("session " + state.session_id + " has ended");
  if (state.suspended) throw SessionError("session " + state.session_id + " is suspended");
  if (blank(student_text)) throw SessionError("student turn must be non-empty");

  append(state, Role::student, std::string(student_text));

  if (is_clarification(student_text)) {
    ExaminerAction action;
    if (auto q = replay_pending(state.replay)) {
      action.kind = ExaminerAction::Kind::replay;
      action.turns.push_back(append(state, Role::examiner, std::move(*q), {Annotation::verbatim_repeat}));
      state.awaiting_since = action.turns.back().timestamp;
    } else {
      action.kind = ExaminerAction::Kind::noted;
      action.turns.push_back(
          append(state, Role::system, "clarification requested but no question is pending"));
    }
    return action;
  }

  switch (state.phase) {
    case SessionPhase::auth:
      if (authenticate(state, student_text)) return enter_next_phase(state);
      ++state.auth_attempts;
      if (state.auth_attempts >= state.config.max_auth_attempts) {
        return close(state, Termination::auth_failed, std::string(kAuthFailedText));
      }
      return generate(state, ExaminerAction::Kind::question);
    case SessionPhase::project:
    case SessionPhase::case_study:
      if (state.turns_in_phase >= phase_budget(state)) return enter_next_phase(state);
      return generate(state, ExaminerAction::Kind::question);
    case SessionPhase::ended:
      break;
  }
  throw SessionError("unreachable session phase");
}

std::optional<Turn> ExamOrchestrator::on_silence(SessionState& state, double elapsed_s) {
  if (state.ended() || state.suspended || state.nudged) return std::nullopt;
  if (elapsed_s < state.config.silence_deadline_s) return std::nullopt;
  state.nudged = true;
  return append(state, Role::examiner, state.config.nudge_text, {Annotation::silence_nudge});
}

ExaminerAction ExamOrchestrator::resume(SessionState& state) {
  if (!state.suspended) throw SessionError("session " + state.session_id + " is not suspended");
  state.suspended = false;
  const bool fresh_phase = state.turns_in_phase == 0 && state.phase != SessionPhase::auth;
  return generate(state, fresh_phase ? ExaminerAction::Kind::transition
                                     : ExaminerAction::Kind::question);
}

void ExamOrchestrator::end_session(SessionState& state, Termination termination) {
  if (state.ended()) return;
  append(state, Role::system, "session ended: " + std::string(to_string(termination)));
  state.replay.pending_question.reset();
  state.phase = SessionPhase::ended;
  state.suspended = false;
  state.transcript.termination = termination;
  state.transcript.ended_at = clock_.now();
}

Json encode(const SessionConfig& c) {
  return {{"silence_deadline_s", c.silence_deadline_s},
          {"max_auth_attempts", c.max_auth_attempts},
          {"project_budget", c.project_budget},
          {"case_budget", c.case_budget},
          {"project_phase", c.project_phase},
          {"case_phase", c.case_phase},
          {"max_regenerations", c.max_regenerations},
          {"seed", c.seed ? Json(*c.seed) : Json(nullptr)},
          {"catalog", encode(c.catalog)},
          {"roster", c.roster},
          {"nudge_text", c.nudge_text},
          {"retry",
           {{"max_attempts", c.retry.max_attempts},
            {"initial_backoff_ms", c.retry.initial_backoff.count()},
            {"multiplier", c.retry.multiplier}}}};
}

SessionConfig decode_session_config(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  SessionConfig c;
  c.silence_deadline_s = r.get_or<double>("silence_deadline_s", c.silence_deadline_s);
  c.max_auth_attempts = r.get_or<int>("max_auth_attempts", c.max_auth_attempts);
  c.project_budget = r.get_or<int>("project_budget", c.project_budget);
  c.case_budget = r.get_or<int>("case_budget", c.case_budget);
  c.project_phase = r.get_or<bool>("project_phase", c.project_phase);
  c.case_phase = r.get_or<bool>("case_phase", c.case_phase);
  c.max_regenerations = r.get_or<int>("max_regenerations", c.max_regenerations);
  c.seed = r.get_optional<std::uint32_t>("seed");
  if (const Json* cat = r.optional_value("catalog")) {
    c.catalog = decode_catalog(with_version(*cat));
  }
  for (auto& id : r.get_or<std::vector<std::string>>("roster", {})) c.roster.insert(std::move(id));
  c.nudge_text = r.get_or<std::string>("nudge_text", c.nudge_text);
  if (const Json* retry = r.optional_value("retry")) {
    ObjectReader rr(*retry, r.path("retry"));
    c.retry.max_attempts = rr.get<int>("max_attempts");
    c.retry.initial_backoff = std::chrono::milliseconds(rr.get<std::int64_t>("initial_backoff_ms"));
    c.retry.multiplier = rr.get<double>("multiplier");
    rr.finish();
  }
  r.finish();
  return c;
}

Json encode(const SessionState& s) {
  return with_version({{"session_id", s.session_id},
                       {"phase", std::string(to_string(s.phase))},
                       {"auth_attempts", s.auth_attempts},
                       {"pending_question", s.replay.pending_question
                                                ? Json(*s.replay.pending_question)
                                                : Json(nullptr)},
                       {"clarification_count", s.replay.clarification_count},
                       {"transcript", encode(s.transcript)},
                       {"config", encode(s.config)},
                       {"seed", s.seed},
                       {"turns_in_phase", s.turns_in_phase},
                       {"nudged", s.nudged},
                       {"awaiting_since", s.awaiting_since},
                       {"suspended", s.suspended},
                       {"suspend_reason", s.suspend_reason}});
}

SessionState decode_session_state(const Json& doc) {
  const Json body = strip_version(doc, "session");
  ObjectReader r(body, "");
  SessionState s;
  s.session_id = r.get<std::string>("session_id");
  const auto phase = r.get<std::string>("phase");
  if (phase == "auth") {
    s.phase = SessionPhase::auth;
  } else if (phase == "project") {
    s.phase = SessionPhase::project;
  } else if (phase == "case") {
    s.phase = SessionPhase::case_study;
  } else if (phase == "ended") {
    s.phase = SessionPhase::ended;
  } else {
    throw SchemaError("phase", "unknown session phase '" + phase + "'");
  }
  s.auth_attempts = r.get<int>("auth_attempts");
  s.replay.pending_question = r.get_optional<std::string>("pending_question");
  s.replay.clarification_count = r.get<int>("clarification_count");
  s.transcript = decode_transcript(r.value("transcript"), "transcript");
  s.config = decode_session_config(r.value("config"), "config");
  s.seed = r.get<std::uint32_t>("seed");
  s.turns_in_phase = r.get<int>("turns_in_phase");
  s.nudged = r.get<bool>("nudged");
  s.awaiting_since = r.get<TimestampMs>("awaiting_since");
  s.suspended = r.get<bool>("suspended");
  s.suspend_reason = r.get_or<std::string>("suspend_reason", "");
  r.finish();
  validate(s.transcript);
  return s;
}

}  // namespace viva
