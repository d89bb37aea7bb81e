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

#include "viva/evidence.hpp"

#include <cctype>

namespace viva {
namespace {

std::vector<UnverifiedQuote> check(const std::vector<std::pair<std::string, std::string>>& quotes,
                                   const std::string& corpus) {
  std::vector<UnverifiedQuote> out;
  for (const auto& [where, quote] : quotes) {
    if (!quote_verifies(quote, corpus)) out.push_back({where, quote});
  }
  return out;
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string evidence_corpus(const Transcript& transcript) {
  std::string joined;
  for (const auto& t : transcript.turns) {
    if (t.role == Role::system) continue;
    if (!joined.empty()) joined.push_back(' ');
    joined += t.text;
  }
  return normalize_whitespace(joined);
}

bool quote_verifies(std::string_view quote, std::string_view corpus) {
  const std::string q = normalize_whitespace(quote);
  return !q.empty() && corpus.find(q) != std::string_view::npos;
}

std::vector<UnverifiedQuote> verify_evidence(const Assessment& assessment,
                                             const Transcript& transcript) {
  std::vector<std::pair<std::string, std::string>> quotes;
  const std::string prefix = std::string(to_string(assessment.round)) + "." + assessment.rater_id + ".";
  for (const auto& s : assessment.scores) {
    for (const auto& q : s.evidence) quotes.emplace_back(prefix + s.dimension_id, q);
  }
  return check(quotes, evidence_corpus(transcript));
}

std::vector<UnverifiedQuote> verify_evidence(const FeedbackReport& feedback,
                                             const Transcript& transcript) {
  std::vector<std::pair<std::string, std::string>> quotes;
  for (std::size_t i = 0; i < feedback.strengths.size(); ++i) {
    quotes.emplace_back("feedback.strengths[" + std::to_string(i) + "]", feedback.strengths[i].evidence);
  }
  for (std::size_t i = 0; i < feedback.weaknesses.size(); ++i) {
    quotes.emplace_back("feedback.weaknesses[" + std::to_string(i) + "]", feedback.weaknesses[i].evidence);
  }
  return check(quotes, evidence_corpus(transcript));
}

std::vector<Flag> evidence_flags(const Assessment& chair, const FeedbackReport& feedback,
                                 const Transcript& transcript) {
  std::vector<Flag> flags;
  auto add = [&](const std::vector<UnverifiedQuote>& missing) {
    for (const auto& m : missing) {
      flags.push_back({FlagKind::unverified_evidence,
                       m.location + ": quote not found in transcript: \"" + m.quote + "\"", 0.0});
    }
  };
  add(verify_evidence(chair, transcript));
  add(verify_evidence(feedback, transcript));
  return flags;
}

}  // namespace viva
