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

#include <filesystem>
#include <string>
#include <vector>

#include "viva/assessment_parser.hpp"
#include "viva/backend.hpp"
#include "viva/model.hpp"
#include "viva/prompt_template.hpp"
#include "viva/reliability.hpp"

namespace viva {

/// Round 1 assessments handed to every rater in Round 2, ordered by rater_id.
struct PeerSummary {
  std::vector<Assessment> entries;
};

/// Sorted by rater_id; every score, justification and evidence quote kept.
PeerSummary compile_peer_summary(std::vector<Assessment> round1);

// Text renderings that go into grading prompts.
std::string render_transcript(const Transcript& transcript);
std::string render_rubric(const Rubric& rubric);
std::string render_assessment(const Assessment& assessment);
std::string render_peer_summary(const PeerSummary& summary);

/// Templates from `<dir>/{round1,round2,chair}.txt`.
struct GradingPrompts {
  PromptTemplate round1;
  PromptTemplate round2;
  PromptTemplate chair;

  static GradingPrompts load(const std::filesystem::path& dir);
};

struct CouncilOptions {
  RetryPolicy retry;
  FlagThresholds thresholds;
  /// Fan Round 1 and Round 2 out across threads.
  bool parallel = true;
};

/// Everything produced before grading stopped, for audit.
struct CouncilPartial {
  std::string transcript_ref;
  std::vector<Assessment> round1;
  std::vector<Assessment> round2;
  std::vector<Flag> flags;
  std::vector<std::string> warnings;
  std::vector<RawModelOutput> outputs;
};

Json encode(const CouncilPartial& partial);

/// Grading cannot continue: fewer than two Round 1 raters survived, or the
/// chair produced no usable output.
class GradingAborted : public Error {
 public:
  GradingAborted(const std::string& message, CouncilPartial partial)
      : Error(message), partial_(std::move(partial)) {}
  const CouncilPartial& partial() const noexcept { return partial_; }

 private:
  CouncilPartial partial_;
};

struct Round1Outcome {
  std::vector<Assessment> assessments;  // council order, failed raters dropped
  std::vector<Flag> flags;
  std::vector<std::string> warnings;
  std::vector<RawModelOutput> outputs;
};

struct RaterOutcome {
  Assessment assessment;
  std::vector<Flag> flags;
  std::vector<std::string> warnings;
  std::vector<RawModelOutput> outputs;
};

struct ChairOutcome {
  Assessment assessment;
  FeedbackReport feedback;
  std::vector<std::string> warnings;
  std::vector<RawModelOutput> outputs;
};

struct CouncilRun {
  CouncilResult result;
  std::vector<RawModelOutput> outputs;
};

/// Three-step grading: independent Round 1, Round 2 deliberation over the
/// compiled peer summary, and chair synthesis.
class GradingCouncil {
 public:
  /// `raters` must satisfy validate_council. The backends are not owned.
  GradingCouncil(GradingPrompts prompts, Rubric rubric, std::vector<ModelBackend*> raters,
                 CouncilOptions options = {});

  /// Each rater sees only the transcript, the rubric and its instructions.
  /// Throws GradingAborted when fewer than two raters produce an assessment.
  Round1Outcome round1(const Transcript& transcript) const;

  /// Parse or backend failure after one reprompt carries the Round 1 scores
  /// forward with a parse_failure flag.
  RaterOutcome round2(const Transcript& transcript, const Assessment& own, const PeerSummary& peers,
                      ModelBackend& backend) const;

  /// Throws GradingAborted (with an empty partial) after one failed reprompt.
  ChairOutcome chair_synthesize(const Transcript& transcript, const std::vector<Assessment>& prior) const;

  /// Full pipeline. Stacked turns are annotated before grading.
  CouncilRun grade(const Transcript& transcript) const;

  const Rubric& rubric() const { return rubric_; }
  ModelBackend& chair_backend() const;

 private:
  struct Attempt;
  Attempt run_rater(ModelBackend& backend, const ParseOptions& options,
                    const std::string& system_prompt) const;

  GradingPrompts prompts_;
  Rubric rubric_;
  std::vector<ModelBackend*> raters_;
  CouncilOptions options_;
};

}  // namespace viva
