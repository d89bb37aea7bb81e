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

#include <gtest/gtest.h>

#include "session_fuzz.hpp"
#include "test_support.hpp"
#include "viva/codec.hpp"
#include "viva/orchestrator.hpp"

namespace viva {
namespace {

constexpr const char* kAuthFailed = "I could not verify that student ID. This examination session is now closed.";
constexpr const char* kCompleted = "Thank you, that concludes the examination. Your transcript has been recorded.";

class OrchestratorTest : public ::testing::Test {
 protected:
  void use_mock(const std::string& name) {
    scripts_ = testing::load_mock(name);
    examiner_ = std::make_unique<MockBackend>(testing::examiner_spec(), scripts_.at("examiner"));
    capturing_ = std::make_unique<CapturingBackend>(*examiner_, log_);
    orchestrator_ = std::make_unique<ExamOrchestrator>(testing::load_exam_prompts(), *capturing_, clock_);
  }

  SessionConfig config() const {
    SessionConfig c;
    c.catalog = testing::load_cases();
    c.retry = {1, std::chrono::milliseconds(1), 2.0};
    return c;
  }

  SessionState start(SessionConfig c, std::string session_id = "sess-1") {
    return orchestrator_->start_session(testing::load_student("s-1001"), c, std::move(session_id));
  }

  MockScripts scripts_;
  std::unique_ptr<MockBackend> examiner_;
  CaptureLog log_;
  std::unique_ptr<CapturingBackend> capturing_;
  ManualClock clock_{1000};
  std::unique_ptr<ExamOrchestrator> orchestrator_;
};

std::vector<Phase> phase_runs(const Transcript& t) {
  std::vector<Phase> out;
  for (const auto& turn : t.turns) {
    if (out.empty() || out.back() != turn.phase) out.push_back(turn.phase);
  }
  return out;
}

int examiner_turns(const Transcript& t, Phase p) {
  int n = 0;
  for (const auto& turn : t.turns) {
    if (turn.role == Role::examiner && turn.phase == p && turn.annotations.empty()) ++n;
  }
  return n;
}

TEST_F(OrchestratorTest, StartOpensWithAuthQuestionAndSelectsCase) {
  use_mock("examiner");
  SessionConfig c = config();
  c.seed = 13;
  const SessionState s = start(c);
  ASSERT_EQ(s.transcript.turns.size(), 1u);
  EXPECT_EQ(s.transcript.turns[0].role, Role::examiner);
  EXPECT_EQ(s.transcript.turns[0].phase, Phase::auth);
  EXPECT_EQ(s.phase, SessionPhase::auth);
  EXPECT_EQ(s.transcript.case_index, 5);
  EXPECT_EQ(s.transcript.exam_case->id, "instagram-feed-ranking");
  EXPECT_EQ(s.transcript.seed, 13u);
  EXPECT_EQ(s.replay.pending_question, s.transcript.turns[0].text);
}

TEST_F(OrchestratorTest, SeedDefaultsToSessionIdHash) {
  use_mock("examiner");
  const SessionState s = start(config(), "ex-1");
  EXPECT_EQ(s.seed, seed_from_session_id("ex-1"));
  EXPECT_EQ(s.transcript.exam_case->id, "netflix-recommendations");
}

TEST_F(OrchestratorTest, FullRunVisitsPhasesInOrderWithinBudgets) {
  use_mock("examiner");
  SessionConfig c = config();
  c.project_budget = 3;
  c.case_budget = 2;
  SessionState s = start(c);
  EXPECT_EQ(orchestrator_->advance(s, "My id is S-1001.").kind, ExaminerAction::Kind::transition);
  EXPECT_EQ(s.phase, SessionPhase::project);
  EXPECT_EQ(orchestrator_->advance(s, "answer one").kind, ExaminerAction::Kind::question);
  EXPECT_EQ(orchestrator_->advance(s, "answer two").kind, ExaminerAction::Kind::question);
  EXPECT_EQ(orchestrator_->advance(s, "answer three").kind, ExaminerAction::Kind::transition);
  EXPECT_EQ(s.phase, SessionPhase::case_study);
  EXPECT_EQ(orchestrator_->advance(s, "case one").kind, ExaminerAction::Kind::question);
  const auto last = orchestrator_->advance(s, "case two");
  EXPECT_EQ(last.kind, ExaminerAction::Kind::end);
  EXPECT_EQ(last.examiner_turn()->text, kCompleted);
  EXPECT_TRUE(s.ended());
  EXPECT_EQ(s.transcript.termination, Termination::completed);
  EXPECT_EQ(phase_runs(s.transcript), (std::vector<Phase>{Phase::auth, Phase::project, Phase::case_study}));
  EXPECT_EQ(examiner_turns(s.transcript, Phase::project), 3);
  EXPECT_EQ(examiner_turns(s.transcript, Phase::case_study), 3);  // 2 questions + closing
  EXPECT_NO_THROW(validate(s.transcript));
  EXPECT_THROW(orchestrator_->advance(s, "more"), SessionError);
}

TEST_F(OrchestratorTest, PhaseTransitionsAreNotDelegatedToTheModel) {
  // The examiner's text never decides the phase: a reply announcing the end
  // of the examination is still just a question in the project phase.
  scripts_ = parse_mock_scripts(Json::parse(R"({"v":1,"backends":{"examiner":{"rules":[
    {"any":true,"response":"The examination is over. Shall we move to the case now?"}]}}})"));
  examiner_ = std::make_unique<MockBackend>(testing::examiner_spec(), scripts_.at("examiner"));
  orchestrator_ = std::make_unique<ExamOrchestrator>(testing::load_exam_prompts(), *examiner_, clock_);
  SessionConfig c = config();
  c.project_budget = 4;
  SessionState s = start(c);
  orchestrator_->advance(s, "s-1001");
  orchestrator_->advance(s, "ok");
  EXPECT_EQ(s.phase, SessionPhase::project);
  EXPECT_EQ(s.turns_in_phase, 2);
}

TEST_F(OrchestratorTest, AuthFailsClosedAfterThreeAttempts) {
  use_mock("examiner");
  SessionState s = start(config());
  EXPECT_EQ(orchestrator_->advance(s, "s-9999").kind, ExaminerAction::Kind::question);
  EXPECT_EQ(orchestrator_->advance(s, "I forgot").kind, ExaminerAction::Kind::question);
  const auto action = orchestrator_->advance(s, "s-10011");
  EXPECT_EQ(action.kind, ExaminerAction::Kind::end);
  EXPECT_EQ(action.examiner_turn()->text, kAuthFailed);
  EXPECT_EQ(s.transcript.termination, Termination::auth_failed);
  EXPECT_EQ(s.auth_attempts, 3);
  EXPECT_EQ(phase_runs(s.transcript), std::vector<Phase>{Phase::auth});
  EXPECT_THROW(orchestrator_->advance(s, "s-1001"), SessionError);
}

TEST_F(OrchestratorTest, RosterMustContainTheStudent) {
  use_mock("examiner");
  SessionConfig c = config();
  c.roster = {"s-2000"};
  SessionState s = start(c);
  for (int i = 0; i < 3; ++i) orchestrator_->advance(s, "s-1001");
  EXPECT_EQ(s.transcript.termination, Termination::auth_failed);

  c.roster = {"S-1001"};  // roster ids are compared case-insensitively
  SessionState ok = start(c, "sess-2");
  orchestrator_->advance(ok, "it's s-1001");
  EXPECT_EQ(ok.phase, SessionPhase::project);
}

TEST_F(OrchestratorTest, ClarificationReplaysVerbatimWithoutBackendCall) {
  use_mock("examiner");
  SessionState s = start(config());
  orchestrator_->advance(s, "s-1001");
  const std::string pending = *s.replay.pending_question;
  const std::size_t calls = examiner_->calls();
  const std::size_t captured = log_.size();
  const int turns_in_phase = s.turns_in_phase;
  for (const char* ask : {"Sorry, could you repeat the question?", "pardon?", "What?"}) {
    const auto action = orchestrator_->advance(s, ask);
    EXPECT_EQ(action.kind, ExaminerAction::Kind::replay);
    ASSERT_NE(action.examiner_turn(), nullptr);
    EXPECT_EQ(action.examiner_turn()->text, pending);
    EXPECT_TRUE(action.examiner_turn()->has(Annotation::verbatim_repeat));
  }
  EXPECT_EQ(examiner_->calls(), calls);
  EXPECT_EQ(log_.size(), captured);
  EXPECT_EQ(s.turns_in_phase, turns_in_phase);
  EXPECT_EQ(s.replay.pending_question, pending);
}

TEST_F(OrchestratorTest, ClarificationWithNothingPendingIsNoted) {
  scripts_ = parse_mock_scripts(Json::parse(R"({"v":1,"backends":{"examiner":{"rules":[
    {"any":true,"response":"Please describe your project in your own words."}]}}})"));
  examiner_ = std::make_unique<MockBackend>(testing::examiner_spec(), scripts_.at("examiner"));
  orchestrator_ = std::make_unique<ExamOrchestrator>(testing::load_exam_prompts(), *examiner_, clock_);
  SessionState s = start(config());
  EXPECT_FALSE(s.replay.pending_question.has_value());
  const auto action = orchestrator_->advance(s, "Could you repeat that?");
  EXPECT_EQ(action.kind, ExaminerAction::Kind::noted);
  ASSERT_EQ(action.turns.size(), 1u);
  EXPECT_EQ(action.turns[0].role, Role::system);
}

TEST_F(OrchestratorTest, SilenceNudgesOnceAtDeadline) {
  use_mock("examiner");
  SessionState s = start(config());
  EXPECT_FALSE(orchestrator_->on_silence(s, 9.999).has_value());
  const auto nudge = orchestrator_->on_silence(s, 10.0);
  ASSERT_TRUE(nudge.has_value());
  EXPECT_EQ(nudge->text, "Are you there?");
  EXPECT_TRUE(nudge->has(Annotation::silence_nudge));
  EXPECT_FALSE(orchestrator_->on_silence(s, 25.0).has_value());
  // A replay re-asks the same pending question: still no second nudge.
  orchestrator_->advance(s, "what?");
  EXPECT_FALSE(orchestrator_->on_silence(s, 30.0).has_value());
  // A new question re-arms the nudge.
  orchestrator_->advance(s, "s-1001");
  EXPECT_TRUE(orchestrator_->on_silence(s, 10.5).has_value());
  orchestrator_->end_session(s, Termination::aborted);
  EXPECT_FALSE(orchestrator_->on_silence(s, 100).has_value());
}

TEST_F(OrchestratorTest, NudgesAreLeftOutOfTheModelContext) {
  use_mock("examiner");
  SessionState s = start(config());
  orchestrator_->advance(s, "s-1001");
  orchestrator_->on_silence(s, 11);
  orchestrator_->advance(s, "parents");
  for (const auto& e : log_.entries()) {
    for (const auto& m : e.request.messages) EXPECT_NE(m.text, "Are you there?");
  }
}

TEST_F(OrchestratorTest, StackedTurnIsRegeneratedBeforeCommit) {
  use_mock("examiner_stacked");
  SessionState s = start(config());
  const auto action = orchestrator_->advance(s, "s-1001");
  const Turn* t = action.examiner_turn();
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(count_questions(t->text), 1);
  EXPECT_FALSE(t->has(Annotation::stacked_question));
  const auto entries = log_.entries();
  ASSERT_GE(entries.size(), 3u);
  const auto& retry = entries.back();
  EXPECT_EQ(retry.tag.substr(retry.tag.size() - 3), ".a2");
  EXPECT_NE(retry.request.messages.back().text.find("rejected (multi_question, 2 questions)"), std::string::npos);
  for (const auto& turn : s.transcript.turns) {
    EXPECT_EQ(turn.text.find("Tighten it up"), std::string::npos);
  }
}

TEST_F(OrchestratorTest, ExhaustedRegenerationsSendOnlyTheFirstQuestion) {
  use_mock("examiner_always_stacked");
  SessionState s = start(config());
  const std::size_t before = examiner_->calls();
  const auto action = orchestrator_->advance(s, "s-1001");
  EXPECT_EQ(examiner_->calls() - before, 3u);  // 1 + max_regenerations
  const Turn* t = action.examiner_turn();
  EXPECT_EQ(t->text,
            "Tighten it up for me: who is the user, and what decision do they make differently because of your "
            "product?");
  EXPECT_EQ(action.turns.front().role, Role::system);
}

TEST_F(OrchestratorTest, BackendFailureSuspendsAndResumeContinues) {
  use_mock("examiner_flaky");
  SessionState s = start(config());
  const auto action = orchestrator_->advance(s, "s-1001");
  EXPECT_EQ(action.kind, ExaminerAction::Kind::suspended);
  EXPECT_TRUE(s.suspended);
  EXPECT_EQ(s.phase, SessionPhase::project);
  EXPECT_THROW(orchestrator_->advance(s, "hello"), SessionError);
  EXPECT_FALSE(orchestrator_->on_silence(s, 60).has_value());
  const auto resumed = orchestrator_->resume(s);
  EXPECT_EQ(resumed.kind, ExaminerAction::Kind::transition);
  EXPECT_EQ(resumed.examiner_turn()->text, "Thanks. Who is the user of your project?");
  EXPECT_FALSE(s.suspended);
  EXPECT_THROW(orchestrator_->resume(s), SessionError);
  EXPECT_NO_THROW(validate(s.transcript));
}

TEST_F(OrchestratorTest, RetryPolicyAbsorbsTransientFailures) {
  use_mock("examiner_flaky");
  SessionConfig c = config();
  c.retry = {3, std::chrono::milliseconds(1), 2.0};
  SessionState s = start(c);
  EXPECT_EQ(orchestrator_->advance(s, "s-1001").kind, ExaminerAction::Kind::transition);
}

TEST_F(OrchestratorTest, DisabledPhasesAreSkipped) {
  use_mock("examiner");
  SessionConfig c = config();
  c.project_phase = false;
  SessionState s = start(c);
  orchestrator_->advance(s, "s-1001");
  EXPECT_EQ(s.phase, SessionPhase::case_study);

  c.case_phase = false;
  SessionState none = start(c, "sess-2");
  EXPECT_FALSE(none.transcript.exam_case.has_value());
  EXPECT_EQ(orchestrator_->advance(none, "s-1001").kind, ExaminerAction::Kind::end);
  EXPECT_EQ(none.transcript.termination, Termination::completed);
}

TEST_F(OrchestratorTest, StartupFailsClosed) {
  use_mock("examiner");
  SessionConfig c = config();
  c.catalog.exclusions.clear();
  for (const auto& cs : c.catalog.cases) c.catalog.exclusions.insert(cs.id);
  EXPECT_THROW(start(c), StartupError);
  c.case_phase = false;
  EXPECT_NO_THROW(start(c));

  SessionConfig bad = config();
  bad.max_auth_attempts = 0;
  EXPECT_THROW(start(bad), StartupError);

  StudentContext no_summary = testing::load_student("s-1001");
  no_summary.project_summary.clear();
  EXPECT_THROW(orchestrator_->start_session(no_summary, config()), StartupError);

  ExamPrompts prompts = testing::load_exam_prompts();
  prompts.case_study = PromptTemplate("case", "Discuss {{case_title}} with {{advisor_name}}.");
  ExamOrchestrator strict(prompts, *examiner_, clock_);
  EXPECT_THROW(strict.start_session(testing::load_student("s-1001"), config()), StartupError);
  EXPECT_THROW(ExamPrompts::load(testing::source_path("fixtures")), StartupError);
}

TEST_F(OrchestratorTest, EndSessionFromAnyPhase) {
  use_mock("examiner");
  SessionState s = start(config());
  orchestrator_->advance(s, "s-1001");
  orchestrator_->end_session(s, Termination::aborted);
  EXPECT_TRUE(s.ended());
  EXPECT_EQ(s.transcript.termination, Termination::aborted);
  EXPECT_EQ(s.transcript.turns.back().role, Role::system);
  EXPECT_EQ(s.transcript.turns.back().text, "session ended: aborted");
  EXPECT_NO_THROW(validate(s.transcript));
}

TEST_F(OrchestratorTest, TimestampsComeFromTheClock) {
  use_mock("examiner");
  clock_.set(5000);
  SessionState s = start(config());
  EXPECT_EQ(s.transcript.started_at, 5000);
  clock_.set(9000);
  orchestrator_->advance(s, "s-1001");
  EXPECT_EQ(s.transcript.turns.back().timestamp, 9000);
  EXPECT_EQ(s.awaiting_since, 9000);
}

TEST_F(OrchestratorTest, BlankStudentTurnIsRejected) {
  use_mock("examiner");
  SessionState s = start(config());
  EXPECT_THROW(orchestrator_->advance(s, "   "), SessionError);
  EXPECT_EQ(s.transcript.turns.size(), 1u);
}

TEST_F(OrchestratorTest, SessionStateRoundTrips) {
  use_mock("examiner");
  SessionConfig c = config();
  c.roster = {"s-1001"};
  SessionState s = start(c);
  orchestrator_->advance(s, "s-1001");
  orchestrator_->on_silence(s, 12);
  orchestrator_->advance(s, "what?");
  const Json j = encode(s);
  const SessionState back = decode_session_state(j);
  EXPECT_EQ(back, s);
  EXPECT_EQ(encode(back), j);
  EXPECT_EQ(decode_session_config(encode(c)), c);
}

TEST_F(OrchestratorTest, TemplatesSeeSessionVariables) {
  use_mock("examiner");
  SessionConfig c = config();
  c.seed = 2;
  SessionState s = start(c);
  orchestrator_->advance(s, "s-1001");
  orchestrator_->advance(s, "a");
  for (int i = 0; i < 6; ++i) orchestrator_->advance(s, "b");
  ASSERT_EQ(s.phase, SessionPhase::case_study);
  const auto& system = log_.entries().back().request.messages.front().text;
  EXPECT_NE(system.find("Netflix recommendation experiments"), std::string::npos);
  EXPECT_NE(system.find("experimentation, metrics"), std::string::npos);
  const auto& first = log_.entries().front().request.messages.front().text;
  EXPECT_NE(first.find("Alice Chen"), std::string::npos);
  EXPECT_NE(first.find("Attempts remaining: 3"), std::string::npos);
}

TEST(OrchestratorFuzz, RandomScriptsKeepInvariants) {
  int completed = 0, auth_failed = 0;
  for (std::uint64_t seed = 1000; seed < 1200; ++seed) {
    const auto outcome = testing::run_fuzzed_session(seed);
    for (const auto& v : outcome.violations) ADD_FAILURE() << v;
    completed += outcome.termination == Termination::completed;
    auth_failed += outcome.termination == Termination::auth_failed;
  }
  // The generator reaches every ending.
  EXPECT_GT(completed, 0);
  EXPECT_GT(auth_failed, 0);
}

}  // namespace
}  // namespace viva
