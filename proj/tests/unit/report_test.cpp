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

#include "viva/report.hpp"

#include <gtest/gtest.h>

#include "cohort_fixtures.hpp"
#include "test_support.hpp"
#include "viva/codec.hpp"
#include "viva/io.hpp"
#include "viva/storage.hpp"

namespace viva {
namespace {

std::vector<CouncilRecord> reference_cohort() {
  const auto r1 = testing::totals_with_spreads(testing::reference_round1_spreads());
  const auto r2 = testing::totals_with_spreads(testing::reference_round2_spreads());
  const auto chairs = testing::reference_chair_cohort();
  std::vector<CouncilRecord> cohort;
  for (std::size_t i = 0; i < 36; ++i) {
    CouncilRecord rec;
    rec.council.transcript_ref = "s" + std::to_string(i);
    rec.council.round1 = testing::assessments_with_totals(r1[i], Round::r1);
    rec.council.round2 = testing::assessments_with_totals(r2[i], Round::r2);
    rec.council.chair = chairs[i];
    rec.duration_ms = 60000 * (15 + static_cast<TimestampMs>(i % 7));
    cohort.push_back(std::move(rec));
  }
  return cohort;
}

TEST(Report, MarkdownShowsAgreementBeforeAndAfterDeliberation) {
  const auto md = render_markdown(build_report(reference_cohort()));
  EXPECT_NE(md.find("# Grading reliability report"), std::string::npos);
  EXPECT_NE(md.find("| Councils analyzed | 36 |"), std::string::npos);
  EXPECT_NE(md.find("| <=0 pt diff (exact) | 3% | 25% |"), std::string::npos) << md;
  EXPECT_NE(md.find("| <=1 pt difference | 3% | 64% |"), std::string::npos);
  EXPECT_NE(md.find("| <=2 pt difference | 28% | 86% |"), std::string::npos);
  EXPECT_NE(md.find("| Mean max difference | 3.69 | 1.33 |"), std::string::npos);
  EXPECT_NE(md.find("| experimentation | 1.94 |"), std::string::npos);
  EXPECT_NE(md.find("| problem_framing | 3.39 |"), std::string::npos);
  EXPECT_NE(md.find("## Duration and score"), std::string::npos);
  EXPECT_NE(md.find("0 of 36 councils carry at least one flag."), std::string::npos);
}

TEST(Report, MarkdownFormatsCorrelation) {
  ReliabilityReport rep;
  rep.councils = 36;
  rep.duration_score = Correlation{-0.09, -0.406, 0.246, 0.601, 36};
  rep.notes = {"round 1 dimension alpha undefined"};
  const auto md = render_markdown(rep);
  EXPECT_NE(md.find("r = -0.09, 95% CI [-0.41, 0.25], p = 0.60, n = 36"), std::string::npos) << md;
  EXPECT_NE(md.find("| Alpha, dimension level (ordinal) | undefined | undefined |"), std::string::npos);
  EXPECT_NE(md.find("## Notes\n\n- round 1 dimension alpha undefined"), std::string::npos);
}

TEST(Report, JsonEncoding) {
  const auto j = encode(build_report(reference_cohort()));
  EXPECT_EQ(j["councils"], 36);
  EXPECT_EQ(j["overall_metric"], "ordinal");
  EXPECT_NEAR(j["round2"]["within_k"]["1"].get<double>(), 23.0 / 36.0, 1e-12);
  EXPECT_NEAR(j["dimension_means"]["experimentation"].get<double>(), 70.0 / 36.0, 1e-12);
  EXPECT_TRUE(j["duration_score"].is_object());
  EXPECT_EQ(j["duration_score"]["ci95"].size(), 2u);
}

TEST(Report, LoadCohortReadsStoreLayoutAndLooseFiles) {
  testing::TempDir dir;
  Store store(dir.path() / "data", [] { return TimestampMs{5}; });
  const auto council = deserialize<CouncilResult>(testing::read_source("fixtures/golden/fx-stacked.council.json"));
  const auto transcript = testing::load_fixture_transcript("fx-stacked");
  store.store_transcript(transcript);
  store.store_council(council);

  CouncilResult other = council;
  other.transcript_ref = "loose";
  write_file_atomic(dir.path() / "data" / "extra" / "loose.council.json", serialize(other));
  write_file_atomic(dir.path() / "data" / "broken.council.json", "{not json");
  write_file_atomic(dir.path() / "data" / "notes.json", "{}");

  const auto cohort = load_cohort(dir.path() / "data");
  ASSERT_EQ(cohort.records.size(), 2u);
  EXPECT_EQ(cohort.session_ids, (std::vector<std::string>{"loose", "fx-stacked"}));
  EXPECT_FALSE(cohort.records[0].duration_ms);
  ASSERT_TRUE(cohort.records[1].duration_ms);
  EXPECT_EQ(*cohort.records[1].duration_ms, transcript.duration_ms());
  ASSERT_EQ(cohort.errors.size(), 1u);
  EXPECT_NE(cohort.errors[0].find("broken.council.json"), std::string::npos);

  EXPECT_THROW(load_cohort(dir.path() / "missing"), StartupError);
}

}  // namespace
}  // namespace viva
