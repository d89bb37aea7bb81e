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

#include <cstdint>
#include <string>
#include <vector>

#include "viva/model.hpp"

namespace viva::testing {

struct FuzzOutcome {
  Termination termination = Termination::aborted;
  std::vector<Phase> phases;        // distinct phases in transcript order
  int nudges = 0;
  std::vector<std::string> violations;  // empty when every invariant held
};

/// Drives one session with a randomly generated student script (answers,
/// wrong and right ids, clarification requests, silences, early exits) and
/// checks the orchestrator's invariants after every step.
FuzzOutcome run_fuzzed_session(std::uint64_t seed);

}  // namespace viva::testing
