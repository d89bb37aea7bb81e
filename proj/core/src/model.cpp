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

#include "viva/model.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <utility>

#include "viva/errors.hpp"

namespace viva {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Role, 3> kRoles{{
    {Role::examiner, "examiner"},
    {Role::student, "student"},
    {Role::system, "system"},
}};
constexpr NameTable<Phase, 3> kPhases{{
    {Phase::auth, "auth"},
    {Phase::project, "project"},
    {Phase::case_study, "case"},
}};
constexpr NameTable<Annotation, 3> kAnnotations{{
    {Annotation::stacked_question, "stacked_question"},
    {Annotation::verbatim_repeat, "verbatim_repeat"},
    {Annotation::silence_nudge, "silence_nudge"},
}};
constexpr NameTable<Termination, 3> kTerminations{{
    {Termination::completed, "completed"},
    {Termination::auth_failed, "auth_failed"},
    {Termination::aborted, "aborted"},
}};
constexpr NameTable<Round, 3> kRounds{{
    {Round::r1, "r1"},
    {Round::r2, "r2"},
    {Round::chair, "chair"},
}};
constexpr NameTable<FlagKind, 4> kFlagKinds{{
    {FlagKind::dimension_disagreement, "dimension_disagreement"},
    {FlagKind::overall_divergence, "overall_divergence"},
    {FlagKind::parse_failure, "parse_failure"},
    {FlagKind::unverified_evidence, "unverified_evidence"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const NameTable<E, N>& table, std::string_view name) {
  for (const auto& [v, n] : table) {
    if (n == name) return v;
  }
  return std::nullopt;
}

std::string at(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

}  // namespace

std::string_view to_string(Role r) { return name_of(kRoles, r); }
std::string_view to_string(Phase p) { return name_of(kPhases, p); }
std::string_view to_string(Annotation a) { return name_of(kAnnotations, a); }
std::string_view to_string(Termination t) { return name_of(kTerminations, t); }
std::string_view to_string(Round r) { return name_of(kRounds, r); }
std::string_view to_string(FlagKind k) { return name_of(kFlagKinds, k); }

std::optional<Role> parse_role(std::string_view s) { return value_of(kRoles, s); }
std::optional<Phase> parse_phase(std::string_view s) { return value_of(kPhases, s); }
std::optional<Annotation> parse_annotation(std::string_view s) {
  return value_of(kAnnotations, s);
}
std::optional<Termination> parse_termination(std::string_view s) {
  return value_of(kTerminations, s);
}
std::optional<Round> parse_round(std::string_view s) { return value_of(kRounds, s); }
std::optional<FlagKind> parse_flag_kind(std::string_view s) {
  return value_of(kFlagKinds, s);
}

const RubricDimension* Rubric::find(std::string_view dimension_id) const {
  auto it = std::find_if(dimensions.begin(), dimensions.end(),
                         [&](const auto& d) { return d.id == dimension_id; });
  return it == dimensions.end() ? nullptr : &*it;
}

const DimensionScore* Assessment::find(std::string_view dimension_id) const {
  auto it = std::find_if(scores.begin(), scores.end(),
                         [&](const auto& s) { return s.dimension_id == dimension_id; });
  return it == scores.end() ? nullptr : &*it;
}

int Assessment::score_sum() const {
  return std::accumulate(scores.begin(), scores.end(), 0,
                         [](int acc, const DimensionScore& s) { return acc + s.score; });
}

void validate(const StudentContext& s) {
  if (s.student_id.empty()) throw SchemaError("student_id", "must be non-empty");
}

void validate(const Turn& t) {
  if (t.index < 0) throw SchemaError("index", "must be >= 0");
  if (t.role != Role::system && t.text.empty()) {
    throw SchemaError("text", "must be non-empty for examiner and student turns");
  }
}

void validate(const Transcript& t) {
  if (t.session_id.empty()) throw SchemaError("session_id", "must be non-empty");
  validate(t.student);
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    const Turn& turn = t.turns[i];
    try {
      validate(turn);
    } catch (const SchemaError& e) {
      throw SchemaError(at("turns", i) + "." + e.field(), "invalid turn");
    }
    if (turn.index != static_cast<int>(i)) {
      throw SchemaError(at("turns", i) + ".index",
                        "indices must be gapless from 0 (expected " + std::to_string(i) +
                            ", got " + std::to_string(turn.index) + ")");
    }
    if (i > 0 && turn.phase < t.turns[i - 1].phase) {
      throw SchemaError(at("turns", i) + ".phase",
                        "phase regresses (auth -> project -> case order violated)");
    }
  }
  if (t.ended_at < t.started_at) {
    throw SchemaError("ended_at", "must not precede started_at");
  }
}

void validate(const Rubric& r) {
  if (r.scale_max != kScaleMax) {
    throw SchemaError("scale_max", "must be " + std::to_string(kScaleMax));
  }
  if (r.dimensions.size() != kDimensionCount) {
    throw SchemaError("dimensions", "exactly 5 dimensions required");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < r.dimensions.size(); ++i) {
    const auto& d = r.dimensions[i];
    if (d.id.empty()) throw SchemaError(at("dimensions", i) + ".id", "must be non-empty");
    if (!ids.insert(d.id).second) {
      throw SchemaError(at("dimensions", i) + ".id", "duplicate dimension id " + d.id);
    }
    for (int score = 0; score <= kScaleMax; ++score) {
      auto it = d.anchors.find(score);
      if (it == d.anchors.end() || it->second.empty()) {
        throw SchemaError(at("dimensions", i) + ".anchors." + std::to_string(score),
                          "anchor text required for every score 0-4");
      }
    }
    if (d.anchors.size() != kScaleMax + 1) {
      throw SchemaError(at("dimensions", i) + ".anchors", "anchors outside 0-4");
    }
  }
}

void validate(const DimensionScore& s) {
  if (s.dimension_id.empty()) throw SchemaError("dimension_id", "must be non-empty");
  if (s.score < 0 || s.score > kScaleMax) {
    throw SchemaError("score", "out of range 0-4: " + std::to_string(s.score));
  }
}

void validate(const Assessment& a, const Rubric* rubric) {
  if (a.rater_id.empty()) throw SchemaError("rater_id", "must be non-empty");
  if (a.scores.size() != kDimensionCount) {
    throw SchemaError("scores", "exactly 5 dimension scores required");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    const auto& s = a.scores[i];
    try {
      validate(s);
    } catch (const SchemaError& e) {
      throw SchemaError(at("scores", i) + "." + e.field(), e.what());
    }
    if (!seen.insert(s.dimension_id).second) {
      throw SchemaError(at("scores", i) + ".dimension_id",
                        "duplicate dimension " + s.dimension_id);
    }
    if (rubric && !rubric->find(s.dimension_id)) {
      throw SchemaError(at("scores", i) + ".dimension_id",
                        "unknown dimension " + s.dimension_id);
    }
    if (a.round == Round::chair && s.evidence.empty()) {
      throw SchemaError(at("scores", i) + ".evidence",
                        "chair scores require at least one evidence quote");
    }
  }
  if (a.total != a.score_sum()) {
    throw SchemaError("total", "must equal the sum of dimension scores (" +
                                   std::to_string(a.score_sum()) + ")");
  }
  if (a.total < 0 || a.total > kTotalMax) throw SchemaError("total", "out of range 0-20");
}

void validate(const FeedbackReport& f) {
  auto check = [](const std::vector<EvidencedClaim>& claims, std::string_view name) {
    for (std::size_t i = 0; i < claims.size(); ++i) {
      if (claims[i].claim.empty()) throw SchemaError(at(name, i) + ".claim", "must be non-empty");
    }
  };
  check(f.strengths, "strengths");
  check(f.weaknesses, "weaknesses");
}

void validate(const CouncilResult& c, const Rubric* rubric) {
  if (c.transcript_ref.empty()) throw SchemaError("transcript_ref", "must be non-empty");
  if (c.round1.size() < 2 || c.round1.size() > 3) {
    throw SchemaError("round1", "expected 2 or 3 assessments");
  }
  auto raters = [](const std::vector<Assessment>& v, Round expected, std::string_view name) {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].round != expected) throw SchemaError(at(name, i) + ".round", "wrong round");
      if (!ids.insert(v[i].rater_id).second) {
        throw SchemaError(at(name, i) + ".rater_id", "duplicate rater " + v[i].rater_id);
      }
    }
    return ids;
  };
  if (raters(c.round1, Round::r1, "round1") != raters(c.round2, Round::r2, "round2")) {
    throw SchemaError("round2", "rater set differs from round1");
  }
  auto nested = [&](const Assessment& a, const std::string& where) {
    try {
      validate(a, rubric);
    } catch (const SchemaError& e) {
      throw SchemaError(where + "." + e.field(), e.what());
    }
  };
  for (std::size_t i = 0; i < c.round1.size(); ++i) nested(c.round1[i], at("round1", i));
  for (std::size_t i = 0; i < c.round2.size(); ++i) nested(c.round2[i], at("round2", i));
  if (c.chair.round != Round::chair) throw SchemaError("chair.round", "must be chair");
  nested(c.chair, "chair");
  validate(c.feedback);
}

void validate_catalog(const std::vector<ExamCase>& cases) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].id.empty()) throw SchemaError(at("cases", i) + ".id", "must be non-empty");
    if (!ids.insert(cases[i].id).second) {
      throw SchemaError(at("cases", i) + ".id", "duplicate case id " + cases[i].id);
    }
  }
}

}  // namespace viva
