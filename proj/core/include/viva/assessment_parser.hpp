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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "viva/model.hpp"

namespace viva {

enum class ParseErrorCode {
  missing_block,
  bad_json,
  schema,
  unknown_dimension,
  duplicate_dimension,
  missing_dimension,
  out_of_range,
  missing_evidence,
};

std::string_view to_string(ParseErrorCode c);

struct ParseError {
  ParseErrorCode code = ParseErrorCode::schema;
  std::string detail;

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

struct ParseOptions {
  std::string rater_id;
  Round round = Round::r1;
  /// Chair output: every score needs evidence and a "feedback" object is required.
  bool chair = false;
};

/// Result of parsing one model reply. Exactly one of `assessment` and
/// `errors` is populated.
struct ParsedReply {
  std::optional<Assessment> assessment;
  std::optional<FeedbackReport> feedback;
  std::vector<ParseError> errors;
  std::vector<std::string> warnings;

  bool ok() const { return assessment.has_value(); }
};

/// Returns the body of the first ```json fenced block (or bare ``` block
/// starting with '{'), and the text outside it.
struct FencedBlock {
  std::string body;
  std::string outside;
};
std::optional<FencedBlock> extract_json_block(std::string_view text);

/// Parses a fenced block of the form
///   {"scores":[{"dimension_id","score","justification","evidence":[...]}...],
///    "total":N, "feedback":{...}}
/// against the rubric. A total that disagrees with the score sum is replaced
/// by the sum and reported in `warnings`. Prose outside the block becomes
/// the assessment notes.
ParsedReply parse_assessment(std::string_view raw, const Rubric& rubric, const ParseOptions& options);

/// A raw model reply with its parse outcome, kept for audit.
struct RawModelOutput {
  std::string rater_id;
  Round round = Round::r1;
  int attempt = 1;
  std::string raw;
  std::optional<Assessment> parsed;
  std::vector<ParseError> parse_errors;
  std::string backend_error;
};

}  // namespace viva
