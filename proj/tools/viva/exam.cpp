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

#include <cctype>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "viva/backend.hpp"
#include "viva/codec.hpp"
#include "viva/io.hpp"
#include "viva/orchestrator.hpp"
#include "viva/storage.hpp"

namespace viva::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

void print_turns(std::ostream& out, const std::vector<Turn>& turns) {
  for (const auto& t : turns) {
    if (t.role == Role::examiner) {
      out << "examiner: " << t.text << "\n";
    } else if (t.role == Role::system) {
      out << "[system] " << t.text << "\n";
    }
  }
  out.flush();
}

BackendSpec examiner_spec(const CommonPaths& paths) {
  if (!paths.backends.empty()) {
    auto config = load_backend_config(paths.backends);
    if (config.examiner) return *config.examiner;
    if (paths.mock_script.empty()) throw StartupError(paths.backends + " has no \"examiner\" entry");
  }
  if (paths.mock_script.empty()) {
    throw StartupError("no examiner backend: pass --backends with an \"examiner\" entry or --mock-script");
  }
  BackendSpec spec;
  spec.rater_id = "examiner";
  spec.family_label = "mock";
  return spec;
}

}  // namespace

std::vector<std::string> read_roster(const std::string& file) {
  std::vector<std::string> ids;
  std::istringstream in(read_file(file));
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    for (auto& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    ids.push_back(line);
  }
  return ids;
}

int run_exam(const ExamOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    const StudentContext student = deserialize<StudentContext>(read_file(o.student));
    ExamPrompts prompts = ExamPrompts::load(o.paths.prompts);

    SessionConfig config;
    config.project_phase = !o.no_project;
    config.case_phase = !o.no_case;
    config.project_budget = o.project_budget;
    config.case_budget = o.case_budget;
    config.max_auth_attempts = o.max_auth_attempts;
    config.silence_deadline_s = o.silence_deadline;
    config.seed = o.seed;
    if (config.case_phase) config.catalog = load_catalog(o.paths.cases);
    if (!o.roster.empty()) {
      for (auto& id : read_roster(o.roster)) config.roster.insert(std::move(id));
    }

    std::optional<MockScripts> scripts;
    if (!o.paths.mock_script.empty()) scripts = load_mock_scripts(o.paths.mock_script);
    auto backend = make_backend(examiner_spec(o.paths), scripts ? &*scripts : nullptr);

    Store store(o.paths.data);
    const std::string session_id = o.session_id.empty() ? student.student_id : o.session_id;
    check_session_id(session_id);
    CaptureLog captures(store.captures_dir(session_id));
    CapturingBackend examiner(*backend, captures);

    std::unique_ptr<Clock> clock;
    const std::string clock_kind = o.clock.empty() ? (scripts ? "logical" : "wall") : o.clock;
    if (clock_kind == "logical") {
      clock = std::make_unique<LogicalClock>(0, 1000);
    } else if (clock_kind == "wall") {
      clock = std::make_unique<WallClock>();
    } else {
      throw StartupError("--clock must be logical or wall");
    }

    std::unique_ptr<ExamOrchestrator> orchestrator;
    if (!o.patterns.empty()) {
      (void)ClarificationPatterns::load(o.patterns);  // fail at startup on a bad file
      orchestrator = std::make_unique<ExamOrchestrator>(std::move(prompts), examiner, *clock,
                                                        std::make_shared<ClarificationDetector>(o.patterns));
    } else {
      orchestrator = std::make_unique<ExamOrchestrator>(std::move(prompts), examiner, *clock);
    }

    SessionState state = orchestrator->start_session(student, config, session_id);
    print_turns(out, state.transcript.turns);

    std::string line;
    while (!state.ended() && std::getline(in, line)) {
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t before = state.transcript.turns.size();
      if (line.starts_with("::silence")) {
        double seconds = 0;
        std::istringstream(line.substr(9)) >> seconds;
        orchestrator->on_silence(state, seconds);
      } else if (line == "::end") {
        orchestrator->end_session(state, Termination::aborted);
      } else if (line == "::resume") {
        if (state.suspended) orchestrator->resume(state);
      } else if (state.suspended) {
        err << "session suspended (" << state.suspend_reason << "); send ::resume or ::end\n";
        continue;
      } else {
        orchestrator->advance(state, line);
      }
      print_turns(out, std::vector<Turn>(state.transcript.turns.begin() + static_cast<std::ptrdiff_t>(before),
                                         state.transcript.turns.end()));
    }
    if (!state.ended()) {
      orchestrator->end_session(state, Termination::aborted);
    }

    const auto file = store.store_transcript(state.transcript, o.force);
    if (!o.quiet) {
      err << "termination: " << to_string(state.transcript.termination) << "\n"
          << "transcript: " << file.string() << "\n";
      if (state.transcript.exam_case) {
        err << "case: " << state.transcript.exam_case->id << " (index " << *state.transcript.case_index
            << ", seed " << *state.transcript.seed << ")\n";
      }
    }
    return state.transcript.termination == Termination::completed ? kOk : kUserError;
  } catch (...) {
    return report_exception(err);
  }
}

}  // namespace viva::cli
