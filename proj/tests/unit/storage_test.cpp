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

#include "viva/storage.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "test_support.hpp"
#include "viva/codec.hpp"
#include "viva/io.hpp"

namespace viva {
namespace {

namespace fs = std::filesystem;

CouncilResult flagged_council(const std::string& session_id) {
  auto c = deserialize<CouncilResult>(testing::read_source("fixtures/golden/fx-stacked.council.json"));
  c.transcript_ref = session_id;
  c.flags.push_back({FlagKind::dimension_disagreement, "dimension experimentation: a=1, b=3 (spread 2)", 2.0});
  return c;
}

ScoreOverride override_from(const Assessment& chair, int bump_dimension) {
  ScoreOverride o;
  o.scores = chair.scores;
  o.scores[static_cast<std::size_t>(bump_dimension)].score =
      std::min(4, o.scores[static_cast<std::size_t>(bump_dimension)].score + 1);
  for (const auto& s : o.scores) o.total += s.score;
  return o;
}

class StoreTest : public ::testing::Test {
 protected:
  TimestampMs tick_ = 100;
  testing::TempDir dir_;
  Store store_{dir_.path(), [this] { return tick_++; }};
};

TEST_F(StoreTest, TranscriptRoundTripAndLayout) {
  const auto t = testing::load_fixture_transcript("fx-basic");
  const auto path = store_.store_transcript(t);
  EXPECT_EQ(path, dir_.path() / "fx-basic" / "transcript.json");
  EXPECT_EQ(read_file(path), serialize(t));
  EXPECT_EQ(store_.load_transcript("fx-basic"), t);
  EXPECT_EQ(store_.captures_dir("fx-basic"), dir_.path() / "fx-basic" / "captures");
  EXPECT_EQ(store_.sessions(), std::vector<std::string>{"fx-basic"});
}

TEST_F(StoreTest, IdenticalRewriteAllowedDifferentNeedsOverwrite) {
  auto t = testing::load_fixture_transcript("fx-short");
  store_.store_transcript(t);
  EXPECT_NO_THROW(store_.store_transcript(t));
  t.turns.back().text += " Edited.";
  try {
    store_.store_transcript(t);
    FAIL();
  } catch (const StorageError& e) {
    EXPECT_EQ(e.kind(), StorageError::Kind::collision);
  }
  store_.store_transcript(t, true);
  EXPECT_EQ(store_.load_transcript("fx-short"), t);
}

TEST_F(StoreTest, MissingAndCorruptEntities) {
  try {
    store_.load_council("nobody");
    FAIL();
  } catch (const StorageError& e) {
    EXPECT_EQ(e.kind(), StorageError::Kind::not_found);
  }
  write_file_atomic(dir_.path() / "bad" / "transcript.json", "{\"v\":1}");
  try {
    store_.load_transcript("bad");
    FAIL();
  } catch (const StorageError& e) {
    EXPECT_EQ(e.kind(), StorageError::Kind::corrupt);
    EXPECT_NE(e.subject().find("transcript.json"), std::string::npos);
  }
  EXPECT_FALSE(store_.has_council("bad"));
}

TEST_F(StoreTest, SessionIdsMustBeSafePathComponents) {
  for (const std::string bad : {"", "..", "../x", "a/b", ".hidden", "audit", "sp ace"}) {
    EXPECT_THROW(check_session_id(bad), StorageError) << bad;
  }
  EXPECT_NO_THROW(check_session_id("s-1001_2.b"));
  auto t = testing::load_fixture_transcript("fx-short");
  t.session_id = "../escape";
  EXPECT_THROW(store_.store_transcript(t), StorageError);
}

TEST_F(StoreTest, EnqueueOnlyFlaggedCouncilsOnce) {
  auto clean = deserialize<CouncilResult>(testing::read_source("fixtures/golden/fx-stacked.council.json"));
  store_.store_council(clean);
  EXPECT_FALSE(store_.enqueue_flags(clean));

  const auto flagged = flagged_council("s-2");
  EXPECT_THROW(store_.enqueue_flags(flagged), StorageError);  // council not stored yet
  store_.store_council(flagged);
  const auto item = store_.enqueue_flags(flagged);
  ASSERT_TRUE(item);
  EXPECT_EQ(item->id, "audit-s-2");
  EXPECT_EQ(item->sequence, 1);
  EXPECT_EQ(item->status, AuditStatus::open);
  EXPECT_EQ(item->flags, flagged.flags);
  EXPECT_EQ(store_.enqueue_flags(flagged), item);
  EXPECT_EQ(store_.queue().size(), 1u);
}

TEST_F(StoreTest, QueueOrderAndStatusFilter) {
  for (const char* id : {"s-c", "s-a", "s-b"}) {
    const auto c = flagged_council(id);
    store_.store_council(c);
    store_.enqueue_flags(c);
  }
  const auto all = store_.queue();
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].council_ref, "s-c");
  EXPECT_EQ(all[2].sequence, 3);

  store_.resolve("audit-s-a", {"auditor-1", std::nullopt, "fine", 0});
  EXPECT_EQ(store_.queue(AuditStatus::open).size(), 2u);
  const auto done = store_.queue(AuditStatus::resolved);
  ASSERT_EQ(done.size(), 1u);
  EXPECT_TRUE(done[0].resolution->affirmed());
  EXPECT_GT(done[0].resolution->timestamp, 0);
}

TEST_F(StoreTest, OverrideIsStoredBesideChairAssessment) {
  const auto c = flagged_council("s-9");
  store_.store_council(c);
  store_.enqueue_flags(c);
  const auto before = read_file(dir_.path() / "s-9" / "council.json");
  const auto o = override_from(c.chair, 3);
  const auto item = store_.resolve("audit-s-9", {"auditor-2", o, "experimentation deserves more", 777});
  EXPECT_EQ(item.status, AuditStatus::resolved);
  EXPECT_EQ(item.resolution->override_scores, o);
  EXPECT_EQ(item.resolution->timestamp, 777);
  // The chair's grade is left untouched.
  EXPECT_EQ(read_file(dir_.path() / "s-9" / "council.json"), before);
  EXPECT_EQ(store_.item("audit-s-9"), item);

  try {
    store_.resolve("audit-s-9", {"auditor-3", std::nullopt, "", 0});
    FAIL();
  } catch (const StorageError& e) {
    EXPECT_EQ(e.kind(), StorageError::Kind::conflict);
    EXPECT_NE(std::string(e.what()).find("auditor-2"), std::string::npos);
  }
}

TEST_F(StoreTest, InvalidOverridesAreRejected) {
  const auto c = flagged_council("s-5");
  store_.store_council(c);
  store_.enqueue_flags(c);
  auto bad_total = override_from(c.chair, 0);
  bad_total.total += 1;
  EXPECT_THROW(store_.resolve("audit-s-5", {"a", bad_total, "", 0}), SchemaError);
  auto out_of_scale = override_from(c.chair, 0);
  out_of_scale.scores[1].score = 5;
  EXPECT_THROW(store_.resolve("audit-s-5", {"a", out_of_scale, "", 0}), SchemaError);
  auto missing = override_from(c.chair, 0);
  missing.total -= missing.scores.back().score;
  missing.scores.pop_back();
  EXPECT_THROW(store_.resolve("audit-s-5", {"a", missing, "", 0}), SchemaError);
  auto renamed = override_from(c.chair, 0);
  renamed.scores[0].dimension_id = "charisma";
  EXPECT_THROW(store_.resolve("audit-s-5", {"a", renamed, "", 0}), SchemaError);
  EXPECT_THROW(store_.resolve("audit-s-5", {"", std::nullopt, "", 0}), SchemaError);
  EXPECT_THROW(store_.resolve("audit-nope", {"a", std::nullopt, "", 0}), StorageError);
  // Still open after every rejected attempt.
  EXPECT_EQ(store_.item("audit-s-5").status, AuditStatus::open);
}

TEST_F(StoreTest, ConcurrentEnqueueKeepsEveryItem) {
  std::vector<CouncilResult> councils;
  for (int i = 0; i < 16; ++i) {
    councils.push_back(flagged_council("c-" + std::to_string(i)));
    store_.store_council(councils.back());
  }
  std::vector<std::thread> threads;
  for (const auto& c : councils) threads.emplace_back([&, c] { store_.enqueue_flags(c); });
  for (auto& t : threads) t.join();
  const auto q = store_.queue();
  ASSERT_EQ(q.size(), 16u);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_EQ(q[i].sequence, static_cast<std::int64_t>(i + 1));
}

TEST(AuditCodec, RoundTrip) {
  AuditItem item;
  item.id = "audit-x";
  item.council_ref = "x";
  item.flags = {{FlagKind::overall_divergence, "totals", 3.0}};
  item.status = AuditStatus::resolved;
  item.resolution = AuditResolution{"me", ScoreOverride{{{"problem_framing", 2, "j", {"q"}}}, 2}, "n", 9};
  item.sequence = 4;
  item.created_at = 12;
  EXPECT_EQ(decode_audit_item(encode(item)), item);
  EXPECT_THROW(decode_resolution(Json{{"auditor_id", "a"}, {"extra", 1}}), SchemaError);
  EXPECT_THROW(decode_resolution(Json{{"auditor_id", ""}}), SchemaError);
}

}  // namespace
}  // namespace viva
