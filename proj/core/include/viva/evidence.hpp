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
#include <vector>

#include "viva/model.hpp"

namespace viva {

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// Examiner and student turn texts in order, joined by single spaces and
/// whitespace-normalized. System turns are excluded.
std::string evidence_corpus(const Transcript& transcript);

/// A quote verifies iff it is non-empty after normalization and is a
/// case-sensitive substring of the corpus.
bool quote_verifies(std::string_view quote, std::string_view corpus);

struct UnverifiedQuote {
  std::string location;  // e.g. "chair.claude.problem_framing" or "feedback.strengths[1]"
  std::string quote;

  friend bool operator==(const UnverifiedQuote&, const UnverifiedQuote&) = default;
};

std::vector<UnverifiedQuote> verify_evidence(const Assessment& assessment,
                                             const Transcript& transcript);
std::vector<UnverifiedQuote> verify_evidence(const FeedbackReport& feedback,
                                             const Transcript& transcript);

/// One unverified_evidence flag per unverifiable quote in the chair
/// assessment and the feedback report.
std::vector<Flag> evidence_flags(const Assessment& chair, const FeedbackReport& feedback,
                                 const Transcript& transcript);

}  // namespace viva
