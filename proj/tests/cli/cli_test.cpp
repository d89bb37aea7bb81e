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

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "test_support.hpp"
#include "viva/codec.hpp"
#include "viva/io.hpp"

namespace viva {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr together
};

// Runs the CLI from the source root with the given arguments.
Run viva(const std::string& args) {
  const std::string cmd = "cd '" + testing::source_path("").string() + "' && '" VIVA_CLI_PATH "' " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string exam_args(const fs::path& data) {
  return "exam --student fixtures/students/s-1001.json --mock-script fixtures/mock/examiner.json --roster "
         "fixtures/roster.txt --session-id ex-1 --quiet --data '" +
         data.string() + "' < fixtures/exam/answers_s-1001.txt";
}

TEST(Cli, ExamIsByteReproducibleAndMatchesGolden) {
  testing::TempDir a, b;
  const auto first = viva(exam_args(a.path()));
  ASSERT_EQ(first.code, 0) << first.out;
  const auto second = viva(exam_args(b.path()));
  ASSERT_EQ(second.code, 0) << second.out;
  const auto bytes_a = read_file(a.path() / "ex-1" / "transcript.json");
  EXPECT_EQ(bytes_a, read_file(b.path() / "ex-1" / "transcript.json"));
  EXPECT_EQ(bytes_a, testing::read_source("fixtures/golden/exam-s-1001.transcript.json"));
  const auto t = deserialize<Transcript>(bytes_a);
  EXPECT_EQ(t.termination, Termination::completed);
  EXPECT_TRUE(fs::exists(a.path() / "ex-1" / "captures"));
}

TEST(Cli, ExamRefusesToOverwriteDifferentTranscript) {
  testing::TempDir d;
  ASSERT_EQ(viva(exam_args(d.path())).code, 0);
  auto t = deserialize<Transcript>(read_file(d.path() / "ex-1" / "transcript.json"));
  t.turns.back().text += " changed";
  write_file_atomic(d.path() / "ex-1" / "transcript.json", serialize(t));
  const auto again = viva(exam_args(d.path()));
  EXPECT_EQ(again.code, 1) << again.out;
  EXPECT_NE(again.out.find("--force"), std::string::npos) << again.out;
}

TEST(Cli, ExamRejectsUnknownStudent) {
  testing::TempDir d;
  write_file_atomic(d.path() / "answers.txt", "s-9999\ns-9998\ns-9997\n");
  const auto r = viva("exam --student fixtures/students/s-1001.json --mock-script fixtures/mock/examiner.json "
                      "--roster fixtures/roster.txt --quiet --data '" + d.path().string() + "' < '" +
                      (d.path() / "answers.txt").string() + "'");
  EXPECT_EQ(r.code, 1) << r.out;
  const auto t = deserialize<Transcript>(read_file(d.path() / "s-1001" / "transcript.json"));
  EXPECT_EQ(t.termination, Termination::auth_failed);
}

TEST(Cli, SelectCase) {
  const auto r = viva("select-case --seed 13");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("seed 13 -> index 5: instagram-feed-ranking"), std::string::npos) << r.out;
  const auto dist = viva("select-case --distribution 8000");
  EXPECT_EQ(dist.code, 0);
  EXPECT_NE(dist.out.find("draws 8000, chi-square"), std::string::npos) << dist.out;
}

TEST(Cli, GradeMatchesGoldenAndQueuesFlaggedCouncils) {
  testing::TempDir d;
  const auto r = viva("grade fixtures/transcripts --mock-script fixtures/mock/council.json --data '" +
                      d.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("fx-basic: total"), std::string::npos);
  EXPECT_NE(r.out.find("audit item audit-fx-basic"), std::string::npos) << r.out;
  EXPECT_EQ(read_file(d.path() / "fx-stacked" / "council.json"),
            testing::read_source("fixtures/golden/fx-stacked.council.json"));
  EXPECT_TRUE(fs::exists(d.path() / "fx-stacked" / "captures" / "chair.claude.a1.json"));

  const auto list = viva("audit list --data '" + d.path().string() + "'");
  EXPECT_EQ(list.code, 0);
  EXPECT_NE(list.out.find("audit-fx-basic\topen\t2 flag(s)"), std::string::npos) << list.out;
  EXPECT_EQ(list.out.find("audit-fx-stacked"), std::string::npos);

  const auto show = viva("audit show audit-fx-basic --data '" + d.path().string() + "'");
  EXPECT_EQ(show.code, 0);
  EXPECT_NE(show.out.find("\"council\""), std::string::npos);

  const auto resolve = viva("audit resolve audit-fx-basic --auditor dr-lee --note ok --data '" + d.path().string() + "'");
  EXPECT_EQ(resolve.code, 0) << resolve.out;
  EXPECT_NE(resolve.out.find("resolved by dr-lee"), std::string::npos);
  const auto twice = viva("audit resolve audit-fx-basic --auditor dr-kim --data '" + d.path().string() + "'");
  EXPECT_NE(twice.code, 0);

  const auto cost = viva("cost --data '" + d.path().string() + "'");
  EXPECT_EQ(cost.code, 0) << cost.out;
  EXPECT_NE(cost.out.find("total_micro="), std::string::npos);

  const auto report = viva("analyze --council-dir '" + d.path().string() + "'");
  EXPECT_EQ(report.code, 0) << report.out;
  EXPECT_NE(report.out.find("| Councils analyzed | 3 |"), std::string::npos) << report.out;
}

TEST(Cli, GuardModes) {
  const auto ex = viva("guard 'What is your metric? And why?' 'What is your metric?'");
  EXPECT_EQ(ex.code, 1);  // at least one turn rejected
  EXPECT_NE(ex.out.find("reject\tquestions=2"), std::string::npos) << ex.out;
  EXPECT_NE(ex.out.find("accept\tquestions=1"), std::string::npos);
  const auto st = viva("guard --mode student 'Could you repeat the question?' 'It is retention.'");
  EXPECT_EQ(st.out, "clarification\nanswer\n");
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(viva("").code, 0);
  EXPECT_NE(viva("grade does/not/exist.json --mock-script fixtures/mock/council.json --data /tmp/x").code, 0);
  EXPECT_NE(viva("analyze --council-dir does/not/exist").code, 0);
}

}  // namespace
}  // namespace viva
