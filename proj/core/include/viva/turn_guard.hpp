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

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "viva/model.hpp"

namespace viva {

/// Counts sentence-terminal question marks: a '?' followed (after any closing
/// quotes or brackets) by end of text or whitespace. A run such as "??"
/// counts once.
int count_questions(std::string_view text);

struct GuardVerdict {
  enum class Outcome { accept, reject };
  enum class Reason { none, multi_question, empty };

  Outcome outcome = Outcome::accept;
  Reason reason = Reason::none;
  int question_count = 0;

  bool accepted() const { return outcome == Outcome::accept; }
  friend bool operator==(const GuardVerdict&, const GuardVerdict&) = default;
};

std::string_view to_string(GuardVerdict::Reason r);

/// Accepts iff the text is non-empty (after trimming) and poses at most one
/// question.
GuardVerdict validate_examiner_turn(std::string_view text);

/// Truncates `text` right after its first sentence-terminal question mark.
/// Text without one is returned trimmed.
std::string first_question(std::string_view text);

/// Lowercases, maps punctuation (other than apostrophes) to spaces and
/// collapses whitespace.
std::string normalize_utterance(std::string_view text);

/// Phrase set for recognising clarification requests.
///
/// Line syntax: `# comment`, blank lines ignored, `=phrase` matches only the
/// whole normalized utterance, any other line matches as a whole-word phrase
/// anywhere in the utterance.
class ClarificationPatterns {
 public:
  static ClarificationPatterns parse(std::string_view text);
  static ClarificationPatterns load(const std::filesystem::path& file);
  /// The phrase set shipped in `data/clarification_patterns.txt`.
  static const ClarificationPatterns& builtin();

  bool matches(std::string_view student_text) const;
  std::size_t size() const { return exact_.size() + phrases_.size(); }

 private:
  std::vector<std::string> exact_;
  std::vector<std::string> phrases_;
};

bool is_clarification_request(std::string_view student_text,
                              const ClarificationPatterns& patterns =
                                  ClarificationPatterns::builtin());

/// File-backed pattern set that picks up edits to the file on the next query.
class ClarificationDetector {
 public:
  explicit ClarificationDetector(std::filesystem::path file);

  bool is_clarification_request(std::string_view student_text);
  /// Reloads when the file's modification time changed. Returns true on reload.
  /// A file that fails to load keeps the previous set.
  bool reload_if_changed();

 private:
  std::filesystem::path file_;
  std::mutex mu_;
  std::filesystem::file_time_type mtime_{};
  std::shared_ptr<const ClarificationPatterns> patterns_;
};

/// Per-session exact-repeat slot: the verbatim text of the last question.
struct ReplayCache {
  std::optional<std::string> pending_question;
  int clarification_count = 0;

  friend bool operator==(const ReplayCache&, const ReplayCache&) = default;
};

/// The pending question, byte-for-byte, or nullopt when nothing is pending.
/// Never modifies `pending_question`; bumps `clarification_count`.
std::optional<std::string> replay_pending(ReplayCache& cache);

/// Marks every examiner turn posing two or more questions with
/// `stacked_question`. Idempotent; other annotations are left alone.
Transcript annotate_stacked_turns(Transcript transcript);

}  // namespace viva
