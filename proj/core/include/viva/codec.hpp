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

#include <string>
#include <string_view>

#include "viva/json_reader.hpp"
#include "viva/model.hpp"

namespace viva {

/// Schema version written as the top-level "v" field of every document.
inline constexpr int kSchemaVersion = 1;

// Element codecs. `decode_*` reject unknown fields and report the dotted
// path of the first offending field; they do not check cross-field
// invariants (use `validate`).
Json encode(const ExamCase& c);
Json encode(const StudentContext& s);
Json encode(const Turn& t);
Json encode(const Transcript& t);
Json encode(const RubricDimension& d);
Json encode(const Rubric& r);
Json encode(const DimensionScore& s);
Json encode(const Assessment& a);
Json encode(const FeedbackReport& f);
Json encode(const Flag& f);
Json encode(const CouncilResult& c);

ExamCase decode_exam_case(const Json& j, const std::string& path = "");
StudentContext decode_student(const Json& j, const std::string& path = "");
Turn decode_turn(const Json& j, const std::string& path = "");
Transcript decode_transcript(const Json& j, const std::string& path = "");
Rubric decode_rubric(const Json& j, const std::string& path = "");
DimensionScore decode_dimension_score(const Json& j, const std::string& path = "");
Assessment decode_assessment(const Json& j, const std::string& path = "");
FeedbackReport decode_feedback(const Json& j, const std::string& path = "");
Flag decode_flag(const Json& j, const std::string& path = "");
CouncilResult decode_council(const Json& j, const std::string& path = "");

/// Canonical document bytes for a top-level entity: validated, sorted keys,
/// schema version field, trailing newline. Serializing the same value always
/// yields the same bytes.
///
/// Supported: Transcript, Rubric, Assessment, CouncilResult, StudentContext.
template <typename T>
std::string serialize(const T& value);

extern template std::string serialize<Transcript>(const Transcript&);
extern template std::string serialize<Rubric>(const Rubric&);
extern template std::string serialize<Assessment>(const Assessment&);
extern template std::string serialize<CouncilResult>(const CouncilResult&);
extern template std::string serialize<StudentContext>(const StudentContext&);

/// Parses and validates a document produced by `serialize`. Throws
/// SchemaError naming the field on any violation, including unknown fields
/// and a missing or unsupported "v".
template <typename T>
T deserialize(std::string_view bytes);

template <> Transcript deserialize<Transcript>(std::string_view bytes);
template <> Rubric deserialize<Rubric>(std::string_view bytes);
template <> Assessment deserialize<Assessment>(std::string_view bytes);
template <> CouncilResult deserialize<CouncilResult>(std::string_view bytes);
template <> StudentContext deserialize<StudentContext>(std::string_view bytes);

/// Checks the "v" field of a top-level document and returns a copy without it.
Json strip_version(const Json& doc, const std::string& what);
/// Returns `body` with "v" set.
Json with_version(Json body);

}  // namespace viva
