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

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "viva/backend.hpp"
#include "viva/codec.hpp"
#include "viva/council.hpp"
#include "viva/io.hpp"
#include "viva/storage.hpp"

namespace viva::cli {
namespace fs = std::filesystem;
namespace {

std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs, std::vector<std::string>& errors) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          found.push_back(entry.path());
        } else if (entry.is_directory() && fs::exists(entry.path() / "transcript.json")) {
          found.push_back(entry.path() / "transcript.json");
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      errors.push_back(input + ": no such file or directory");
    }
  }
  return files;
}

struct Outcome {
  int code = kOk;
  std::string line;
};

Outcome grade_one(const fs::path& file, const GradeOptions& o, const BackendConfig& config,
                  const MockScripts* scripts, const GradingPrompts& prompts, const Rubric& rubric, Store& store) {
  Transcript transcript;
  try {
    transcript = deserialize<Transcript>(read_file(file));
  } catch (const Error& e) {
    return {kUserError, "error: " + file.string() + ": " + e.what()};
  }
  const std::string sid = transcript.session_id;
  try {
    store.store_transcript(transcript, o.force);
    std::vector<std::unique_ptr<ModelBackend>> owned;
    for (const auto& spec : config.council) owned.push_back(make_backend(spec, scripts));
    CaptureLog captures(store.captures_dir(sid));
    std::vector<std::unique_ptr<CapturingBackend>> wrapped;
    std::vector<ModelBackend*> raters;
    for (auto& b : owned) {
      wrapped.push_back(std::make_unique<CapturingBackend>(*b, captures));
      raters.push_back(wrapped.back().get());
    }
    CouncilOptions options;
    options.parallel = !o.sequential;
    GradingCouncil council(prompts, rubric, raters, options);
    try {
      const CouncilRun run = council.grade(transcript);
      store.store_council(run.result, o.force);
      const auto item = store.enqueue_flags(run.result);
      std::ostringstream line;
      line << sid << ": total " << run.result.chair.total << "/" << kTotalMax << ", "
           << run.result.flags.size() << " flag(s)";
      if (item) line << ", audit item " << item->id;
      return {kOk, line.str()};
    } catch (const GradingAborted& e) {
      const fs::path partial = store.session_dir(sid) / "council.partial.json";
      write_file_atomic(partial, canonical_dump(encode(e.partial())));
      return {kInternal, "aborted: " + sid + ": " + e.what() + " (partial results in " + partial.string() + ")"};
    }
  } catch (const StorageError& e) {
    return {kUserError, "error: " + file.string() + ": " + e.what() + storage_hint(e)};
  } catch (const Error& e) {
    return {kInternal, "error: " + file.string() + ": " + e.what()};
  }
}

}  // namespace

int run_grade(const GradeOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const std::string backends = o.paths.backends.empty() ? "data/backends.json" : o.paths.backends;
    const BackendConfig config = load_backend_config(backends);
    validate_council(config.council);
    std::optional<MockScripts> scripts;
    if (!o.paths.mock_script.empty()) scripts = load_mock_scripts(o.paths.mock_script);
    const GradingPrompts prompts = GradingPrompts::load(fs::path(o.paths.prompts) / "grading");
    const Rubric rubric = deserialize<Rubric>(read_file(o.paths.rubric));
    Store store(o.paths.data);

    std::vector<std::string> errors;
    const auto files = collect_inputs(o.inputs, errors);
    if (files.empty() && errors.empty()) throw StartupError("no transcripts to grade");

    std::vector<Outcome> outcomes(files.size());
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, o.jobs));
    for (std::size_t start = 0; start < files.size(); start += jobs) {
      std::vector<std::future<Outcome>> batch;
      for (std::size_t i = start; i < std::min(files.size(), start + jobs); ++i) {
        batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, [&, i] {
          return grade_one(files[i], o, config, scripts ? &*scripts : nullptr, prompts, rubric, store);
        }));
      }
      for (std::size_t k = 0; k < batch.size(); ++k) outcomes[start + k] = batch[k].get();
    }

    int code = errors.empty() ? kOk : kUserError;
    for (const auto& e : errors) err << "error: " << e << "\n";
    for (const auto& r : outcomes) {
      (r.code == kOk ? out : err) << r.line << "\n";
      code = std::max(code, r.code);
    }
    return code;
  } catch (...) {
    return report_exception(err);
  }
}

}  // namespace viva::cli
