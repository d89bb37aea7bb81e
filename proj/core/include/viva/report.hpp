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
#include <string>
#include <vector>

#include "viva/json_reader.hpp"
#include "viva/reliability.hpp"

namespace viva {

struct Cohort {
  std::vector<std::string> session_ids;  // parallel to records
  std::vector<CouncilRecord> records;
  std::vector<std::string> errors;       // files that could not be loaded
};

/// Loads every `council.json` and `*.council.json` under `dir`, sorted by
/// path. A `transcript.json` next to a `council.json` supplies the duration.
Cohort load_cohort(const std::filesystem::path& dir);

Json encode(const ReliabilityReport& report);
/// Human-readable report: cohort summary, agreement before and after
/// deliberation, per-dimension diagnostics, convergence, duration.
std::string render_markdown(const ReliabilityReport& report);

}  // namespace viva
