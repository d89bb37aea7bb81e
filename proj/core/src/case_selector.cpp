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

#include "viva/case_selector.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include "viva/codec.hpp"
#include "viva/io.hpp"
#include "viva/stable_hash.hpp"

namespace viva {

std::vector<ExamCase> CaseCatalog::eligible() const {
  std::vector<ExamCase> out;
  for (const auto& c : cases) {
    if (!exclusions.contains(c.id)) out.push_back(c);
  }
  return out;
}

CaseSelection select_case(std::uint32_t seed, const CaseCatalog& catalog) {
  auto eligible = catalog.eligible();
  if (eligible.empty()) throw SelectionError("no eligible cases in catalog");
  const auto index = static_cast<std::size_t>(seed % eligible.size());
  return {eligible[index], static_cast<int>(index)};
}

DistributionReport distribution_report(const CaseCatalog& catalog,
                                       std::span<const std::uint32_t> seeds) {
  const auto eligible = catalog.eligible();
  if (eligible.empty()) throw SelectionError("no eligible cases in catalog");
  DistributionReport r;
  for (const auto& c : eligible) r.case_ids.push_back(c.id);
  r.counts.assign(eligible.size(), 0);
  for (auto seed : seeds) {
    ++r.counts[static_cast<std::size_t>(select_case(seed, catalog).eligible_index)];
  }
  r.draws = static_cast<std::int64_t>(seeds.size());
  r.degrees_of_freedom = static_cast<int>(eligible.size()) - 1;
  if (r.draws == 0) return r;
  const double expected = static_cast<double>(r.draws) / static_cast<double>(eligible.size());
  for (auto n : r.counts) {
    const double d = static_cast<double>(n) - expected;
    r.chi_square += d * d / expected;
  }
  if (r.degrees_of_freedom > 0) {
    boost::math::chi_squared dist(r.degrees_of_freedom);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.chi_square));
  }
  return r;
}

std::uint32_t seed_from_session_id(std::string_view session_id) {
  const std::uint64_t h = fnv1a64(session_id);
  return static_cast<std::uint32_t>(h ^ (h >> 32));
}

Json encode(const CaseCatalog& catalog) {
  Json cases = Json::array();
  for (const auto& c : catalog.cases) cases.push_back(encode(c));
  return {{"cases", cases}, {"exclusions", catalog.exclusions}};
}

CaseCatalog decode_catalog(const Json& doc) {
  const Json body = strip_version(doc, "cases");
  ObjectReader r(body, "");
  CaseCatalog catalog;
  for_each_element(r.value("cases"), "cases", [&](const Json& e, const std::string& where) {
    catalog.cases.push_back(decode_exam_case(e, where));
  });
  for (auto& id : r.get_or<std::vector<std::string>>("exclusions", {})) {
    catalog.exclusions.insert(std::move(id));
  }
  r.finish();
  validate_catalog(catalog.cases);
  return catalog;
}

CaseCatalog load_catalog(const std::filesystem::path& file) {
  return decode_catalog(parse_json(read_file(file), file.string()));
}

}  // namespace viva
