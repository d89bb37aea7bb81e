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

#include "viva/turn_guard.hpp"

#include <cctype>
#include <sstream>
#include <system_error>

#include "viva/errors.hpp"
#include "viva/io.hpp"

namespace viva {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// Position one past each sentence-terminal '?' run, including trailing
// closing quotes or brackets ("...?" counts, "why?"-part does not).
template <typename Fn>
void for_each_terminal_question(std::string_view text, Fn&& fn) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '?') continue;
    std::size_t end = i + 1;
    while (end < text.size() && is_closer(text[end])) ++end;
    const bool terminal = end == text.size() || is_space(text[end]);
    if (terminal) {
      if (!fn(end)) return;
      i = end - 1;
    }
  }
}

// Shipped default; kept in sync with data/clarification_patterns.txt.
constexpr std::string_view kBuiltinPatterns = R"(# whole-utterance requests
=what
=what was that
=sorry
=sorry what
=pardon
=huh
=come again
=again
=repeat
=repeat please
=say again
=excuse me
# phrases
repeat the question
repeat that
repeat it
repeat your question
repeat the last question
repeat the last part
can you repeat
could you repeat
would you repeat
please repeat
repeat please
say that again
say it again
say the question again
didn't catch
did not catch
didn't hear
did not hear
didn't get that
did not get that
pardon me
come again
what was the question
what did you ask
what do you mean
could you rephrase
can you rephrase
please rephrase
rephrase the question
could you clarify
can you clarify
didn't understand the question
did not understand the question
don't understand the question
do not understand the question
)";

}  // namespace

int count_questions(std::string_view text) {
  int n = 0;
  for_each_terminal_question(text, [&](std::size_t) {
    ++n;
    return true;
  });
  return n;
}

std::string_view to_string(GuardVerdict::Reason r) {
  switch (r) {
    case GuardVerdict::Reason::none: return "none";
    case GuardVerdict::Reason::multi_question: return "multi_question";
    case GuardVerdict::Reason::empty: return "empty";
  }
  return "?";
}

GuardVerdict validate_examiner_turn(std::string_view text) {
  GuardVerdict v;
  v.question_count = count_questions(text);
  if (trim(text).empty()) {
    v.outcome = GuardVerdict::Outcome::reject;
    v.reason = GuardVerdict::Reason::empty;
  } else if (v.question_count > 1) {
    v.outcome = GuardVerdict::Outcome::reject;
    v.reason = GuardVerdict::Reason::multi_question;
  }
  return v;
}

std::string first_question(std::string_view text) {
  std::size_t cut = std::string_view::npos;
  for_each_terminal_question(text, [&](std::size_t end) {
    cut = end;
    return false;
  });
  if (cut == std::string_view::npos) return std::string(trim(text));
  return std::string(trim(text.substr(0, cut)));
}

std::string normalize_utterance(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    // U+2019 RIGHT SINGLE QUOTATION MARK -> apostrophe.
    if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      c = '\'';
      i += 2;
    }
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || c == '\'' || uc >= 0x80) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

ClarificationPatterns ClarificationPatterns::parse(std::string_view text) {
  ClarificationPatterns p;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    if (l.front() == '=') {
      auto n = normalize_utterance(l.substr(1));
      if (!n.empty()) p.exact_.push_back(std::move(n));
    } else {
      auto n = normalize_utterance(l);
      if (!n.empty()) p.phrases_.push_back(std::move(n));
    }
  }
  return p;
}

ClarificationPatterns ClarificationPatterns::load(const std::filesystem::path& file) {
  return parse(read_file(file));
}

const ClarificationPatterns& ClarificationPatterns::builtin() {
  static const ClarificationPatterns patterns = parse(kBuiltinPatterns);
  return patterns;
}

bool ClarificationPatterns::matches(std::string_view student_text) const {
  const std::string norm = normalize_utterance(student_text);
  if (norm.empty()) return false;
  for (const auto& e : exact_) {
    if (norm == e) return true;
  }
  const std::string padded = " " + norm + " ";
  for (const auto& p : phrases_) {
    if (padded.find(" " + p + " ") != std::string::npos) return true;
  }
  return false;
}

bool is_clarification_request(std::string_view student_text,
                              const ClarificationPatterns& patterns) {
  return patterns.matches(student_text);
}

ClarificationDetector::ClarificationDetector(std::filesystem::path file)
    : file_(std::move(file)) {
  patterns_ = std::make_shared<const ClarificationPatterns>(ClarificationPatterns::load(file_));
  std::error_code ec;
  mtime_ = std::filesystem::last_write_time(file_, ec);
}

bool ClarificationDetector::reload_if_changed() {
  std::error_code ec;
  const auto mtime = std::filesystem::last_write_time(file_, ec);
  if (ec) return false;
  std::lock_guard lock(mu_);
  if (mtime == mtime_) return false;
  try {
    patterns_ = std::make_shared<const ClarificationPatterns>(ClarificationPatterns::load(file_));
  } catch (const Error&) {
    return false;
  }
  mtime_ = mtime;
  return true;
}

bool ClarificationDetector::is_clarification_request(std::string_view student_text) {
  reload_if_changed();
  std::shared_ptr<const ClarificationPatterns> p;
  {
    std::lock_guard lock(mu_);
    p = patterns_;
  }
  return p->matches(student_text);
}

std::optional<std::string> replay_pending(ReplayCache& cache) {
  if (!cache.pending_question) return std::nullopt;
  ++cache.clarification_count;
  return cache.pending_question;
}

Transcript annotate_stacked_turns(Transcript transcript) {
  for (auto& turn : transcript.turns) {
    if (turn.role == Role::examiner && count_questions(turn.text) >= 2) {
      turn.annotations.insert(Annotation::stacked_question);
    }
  }
  return transcript;
}

}  // namespace viva
