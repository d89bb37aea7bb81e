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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace viva {

/// Milliseconds since the Unix epoch (or since session start under a logical
/// clock).
using TimestampMs = std::int64_t;

inline constexpr int kDimensionCount = 5;
inline constexpr int kScaleMax = 4;
inline constexpr int kTotalMax = kDimensionCount * kScaleMax;

enum class Role { examiner, student, system };
enum class Phase { auth, project, case_study };
enum class Annotation { stacked_question, verbatim_repeat, silence_nudge };
enum class Termination { completed, auth_failed, aborted };
enum class Round { r1, r2, chair };
enum class FlagKind {
  dimension_disagreement,
  overall_divergence,
  parse_failure,
  unverified_evidence,
};

std::string_view to_string(Role r);
std::string_view to_string(Phase p);
std::string_view to_string(Annotation a);
std::string_view to_string(Termination t);
std::string_view to_string(Round r);
std::string_view to_string(FlagKind k);

// Parsers return nullopt for unknown names.
std::optional<Role> parse_role(std::string_view s);
std::optional<Phase> parse_phase(std::string_view s);
std::optional<Annotation> parse_annotation(std::string_view s);
std::optional<Termination> parse_termination(std::string_view s);
std::optional<Round> parse_round(std::string_view s);
std::optional<FlagKind> parse_flag_kind(std::string_view s);

struct ExamCase {
  std::string id;
  std::string title;
  std::vector<std::string> topic_tags;

  friend bool operator==(const ExamCase&, const ExamCase&) = default;
};

struct StudentContext {
  std::string student_id;
  std::string display_name;
  std::string project_summary;
  std::map<std::string, std::string> extra_vars;

  friend bool operator==(const StudentContext&, const StudentContext&) = default;
};

struct Turn {
  int index = 0;
  Role role = Role::examiner;
  Phase phase = Phase::auth;
  std::string text;
  TimestampMs timestamp = 0;
  std::set<Annotation> annotations;

  bool has(Annotation a) const { return annotations.contains(a); }
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Transcript {
  std::string session_id;
  StudentContext student;
  std::optional<ExamCase> exam_case;
  // Seed and eligible-list index used for case selection, for reproducibility.
  std::optional<std::uint32_t> seed;
  std::optional<int> case_index;
  std::vector<Turn> turns;
  TimestampMs started_at = 0;
  TimestampMs ended_at = 0;
  Termination termination = Termination::aborted;

  TimestampMs duration_ms() const { return ended_at - started_at; }
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct RubricDimension {
  std::string id;
  std::string name;
  std::string description;
  std::map<int, std::string> anchors;  // 0..4

  friend bool operator==(const RubricDimension&, const RubricDimension&) = default;
};

struct Rubric {
  std::vector<RubricDimension> dimensions;
  std::string interference_protocol;
  int scale_max = kScaleMax;

  const RubricDimension* find(std::string_view dimension_id) const;
  friend bool operator==(const Rubric&, const Rubric&) = default;
};

struct DimensionScore {
  std::string dimension_id;
  int score = 0;
  std::string justification;
  std::vector<std::string> evidence;

  friend bool operator==(const DimensionScore&, const DimensionScore&) = default;
};

struct Assessment {
  std::string rater_id;
  Round round = Round::r1;
  std::vector<DimensionScore> scores;
  int total = 0;
  std::string notes;

  const DimensionScore* find(std::string_view dimension_id) const;
  int score_sum() const;
  friend bool operator==(const Assessment&, const Assessment&) = default;
};

struct EvidencedClaim {
  std::string claim;
  std::string evidence;

  friend bool operator==(const EvidencedClaim&, const EvidencedClaim&) = default;
};

struct FeedbackReport {
  std::vector<EvidencedClaim> strengths;
  std::vector<EvidencedClaim> weaknesses;
  std::vector<std::string> action_items;

  friend bool operator==(const FeedbackReport&, const FeedbackReport&) = default;
};

struct Flag {
  FlagKind kind = FlagKind::parse_failure;
  std::string detail;
  double threshold_value = 0.0;

  friend bool operator==(const Flag&, const Flag&) = default;
};

struct CouncilResult {
  std::string transcript_ref;
  std::vector<Assessment> round1;
  std::vector<Assessment> round2;
  Assessment chair;
  FeedbackReport feedback;
  std::vector<Flag> flags;
  std::vector<std::string> warnings;

  friend bool operator==(const CouncilResult&, const CouncilResult&) = default;
};

// Invariant checks. Each throws SchemaError naming the offending field.
void validate(const StudentContext& s);
void validate(const Turn& t);
void validate(const Transcript& t);
void validate(const Rubric& r);
void validate(const DimensionScore& s);
/// With a rubric, also checks one score per rubric dimension.
void validate(const Assessment& a, const Rubric* rubric = nullptr);
void validate(const FeedbackReport& f);
void validate(const CouncilResult& c, const Rubric* rubric = nullptr);

/// Throws SchemaError unless case ids are unique.
void validate_catalog(const std::vector<ExamCase>& cases);

}  // namespace viva
