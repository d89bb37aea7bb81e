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

#include "test_support.hpp"
#include "viva/codec.hpp"
#include "viva/evidence.hpp"

namespace viva {
namespace {

TEST(Evidence, WhitespaceNormalization) {
  EXPECT_EQ(normalize_whitespace("  a \n\t b   c  "), "a b c");
  EXPECT_EQ(normalize_whitespace(""), "");
}

TEST(Evidence, CorpusJoinsExaminerAndStudentTurnsOnly) {
  Transcript t = testing::load_fixture_transcript("fx-short");
  t.turns.push_back({static_cast<int>(t.turns.size()), Role::system, Phase::case_study, "session ended: aborted", 0, {}});
  const std::string corpus = evidence_corpus(t);
  EXPECT_EQ(corpus.find("session ended"), std::string::npos);
  EXPECT_NE(corpus.find("Could you please tell me your student ID? My ID is s-1003."), std::string::npos);
}

TEST(Evidence, QuotesVerifyAcrossWhitespaceButNotCase) {
  const std::string corpus = normalize_whitespace("The counter metric is grocery waste in kilograms.");
  EXPECT_TRUE(quote_verifies("grocery waste", corpus));
  EXPECT_TRUE(quote_verifies("  counter   metric\nis ", corpus));
  EXPECT_FALSE(quote_verifies("Grocery waste", corpus));
  EXPECT_FALSE(quote_verifies("grocery wastes", corpus));
  EXPECT_FALSE(quote_verifies("   ", corpus));
}

TEST(Evidence, QuoteSpanningTwoTurnsVerifies) {
  const Transcript t = testing::load_fixture_transcript("fx-short");
  EXPECT_TRUE(quote_verifies("How do you measure a good match? A good match", evidence_corpus(t)));
}

TEST(Evidence, GoldenCouncilQuotesAllVerify) {
  const Transcript t = testing::load_fixture_transcript("fx-stacked");
  const CouncilResult c = deserialize<CouncilResult>(testing::read_source("fixtures/golden/fx-stacked.council.json"));
  for (const auto& a : c.round1) EXPECT_TRUE(verify_evidence(a, t).empty()) << a.rater_id;
  for (const auto& a : c.round2) EXPECT_TRUE(verify_evidence(a, t).empty()) << a.rater_id;
  EXPECT_TRUE(verify_evidence(c.chair, t).empty());
  EXPECT_TRUE(verify_evidence(c.feedback, t).empty());
  EXPECT_TRUE(evidence_flags(c.chair, c.feedback, t).empty());
}

TEST(Evidence, UnverifiedQuotesAreLocatedAndFlagged) {
  const Transcript t = testing::load_fixture_transcript("fx-stacked");
  CouncilResult c = deserialize<CouncilResult>(testing::read_source("fixtures/golden/fx-stacked.council.json"));
  c.chair.scores[1].evidence.push_back("planned dinners really cooked per week");
  c.feedback.weaknesses[0].evidence = "made up";
  const auto bad_chair = verify_evidence(c.chair, t);
  ASSERT_EQ(bad_chair.size(), 1u);
  EXPECT_EQ(bad_chair[0].location, "chair.claude.metrics_economics");
  const auto bad_feedback = verify_evidence(c.feedback, t);
  ASSERT_EQ(bad_feedback.size(), 1u);
  EXPECT_EQ(bad_feedback[0].location, "feedback.weaknesses[0]");
  const auto flags = evidence_flags(c.chair, c.feedback, t);
  ASSERT_EQ(flags.size(), 2u);
  for (const auto& f : flags) EXPECT_EQ(f.kind, FlagKind::unverified_evidence);
  EXPECT_NE(flags[0].detail.find("planned dinners really cooked per week"), std::string::npos);
}

}  // namespace
}  // namespace viva
