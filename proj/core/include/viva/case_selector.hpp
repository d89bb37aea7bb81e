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
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viva/errors.hpp"
#include "viva/json_reader.hpp"
#include "viva/model.hpp"

namespace viva {

class SelectionError : public Error {
 public:
  using Error::Error;
};

struct CaseCatalog {
  std::vector<ExamCase> cases;
  std::set<std::string> exclusions;

  /// Cases minus exclusions, in catalog order.
  std::vector<ExamCase> eligible() const;
  friend bool operator==(const CaseCatalog&, const CaseCatalog&) = default;
};

struct CaseSelection {
  ExamCase exam_case;
  int eligible_index = 0;
};

/// eligible[seed mod |eligible|]. Throws SelectionError when nothing is
/// eligible.
CaseSelection select_case(std::uint32_t seed, const CaseCatalog& catalog);

struct DistributionReport {
  std::vector<std::string> case_ids;  // eligible order
  std::vector<std::int64_t> counts;   // parallel to case_ids
  std::int64_t draws = 0;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;  // upper tail of chi-square(dof)
};

/// Selection frequency per eligible case over `seeds`, with a chi-square
/// goodness-of-fit statistic against the uniform distribution.
DistributionReport distribution_report(const CaseCatalog& catalog,
                                       std::span<const std::uint32_t> seeds);

/// Stable 32-bit seed derived from a session id (FNV-1a, folded).
std::uint32_t seed_from_session_id(std::string_view session_id);

Json encode(const CaseCatalog& catalog);
CaseCatalog decode_catalog(const Json& doc);
/// Reads a `cases.json` document ({"v":1,"cases":[...],"exclusions":[...]}).
CaseCatalog load_catalog(const std::filesystem::path& file);

}  // namespace viva
