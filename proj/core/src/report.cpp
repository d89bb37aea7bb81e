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

#include "viva/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "viva/codec.hpp"
#include "viva/io.hpp"

namespace viva {
namespace fs = std::filesystem;
namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pct(double v) { return fixed(100.0 * v, 0) + "%"; }

std::string opt(const std::optional<double>& v) { return v ? fixed(*v, 3) : "undefined"; }

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json encode_stats(const SummaryStats& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"median", s.median}, {"max", s.max}};
}

Json encode_agreement(const AgreementStats& a) {
  Json within = Json::object();
  for (const auto& [k, v] : a.within_k) within[std::to_string(k)] = v;
  return {{"alpha_dimension", opt_json(a.alpha_dimension)},
          {"alpha_overall", opt_json(a.alpha_overall)},
          {"within_k", within},
          {"mean_max_diff", a.mean_max_diff},
          {"units", a.units}};
}

double within(const AgreementStats& a, int k) {
  auto it = a.within_k.find(k);
  return it == a.within_k.end() ? 0.0 : it->second;
}

}  // namespace

Cohort load_cohort(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw StartupError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "council.json" || (name.size() > 13 && name.ends_with(".council.json"))) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  Cohort cohort;
  for (const auto& file : files) {
    try {
      CouncilRecord rec;
      rec.council = deserialize<CouncilResult>(read_file(file));
      if (file.filename() == "council.json") {
        if (auto t = try_read_file(file.parent_path() / "transcript.json")) {
          rec.duration_ms = deserialize<Transcript>(*t).duration_ms();
        }
      }
      cohort.session_ids.push_back(rec.council.transcript_ref);
      cohort.records.push_back(std::move(rec));
    } catch (const Error& e) {
      cohort.errors.push_back(file.string() + ": " + e.what());
    }
  }
  return cohort;
}

Json encode(const ReliabilityReport& r) {
  Json dims = Json::object();
  for (const auto& [id, d] : r.dimension_agreement) {
    dims[id] = {{"alpha_r2", opt_json(d.alpha)}, {"within1_r2", d.within1}, {"mean_chair", d.mean_chair}};
  }
  Json corr = nullptr;
  if (r.duration_score) {
    const auto& c = *r.duration_score;
    corr = {{"r", c.r}, {"ci95", {c.ci_low, c.ci_high}}, {"p", c.p_value}, {"n", c.n}};
  }
  return with_version({{"councils", r.councils},
                       {"overall_metric", std::string(to_string(r.overall_metric))},
                       {"round1", encode_agreement(r.round1)},
                       {"round2", encode_agreement(r.round2)},
                       {"shifts", r.shifts},
                       {"dimension_means", r.dimension_means},
                       {"dimensions", dims},
                       {"chair_totals", r.chair_totals ? encode_stats(*r.chair_totals) : Json(nullptr)},
                       {"duration_minutes", r.duration_minutes ? encode_stats(*r.duration_minutes) : Json(nullptr)},
                       {"duration_score", corr},
                       {"flags_summary", {{"by_kind", r.flags_summary.by_kind},
                                          {"flagged_councils", r.flags_summary.flagged_councils}}},
                       {"notes", r.notes}});
}

std::string render_markdown(const ReliabilityReport& r) {
  std::ostringstream out;
  out << "# Grading reliability report\n\n";
  out << "## Cohort\n\n| Metric | Value |\n|---|---|\n";
  out << "| Councils analyzed | " << r.councils << " |\n";
  if (r.chair_totals) {
    const auto& s = *r.chair_totals;
    out << "| Mean final score | " << fixed(s.mean) << " / 20 |\n";
    out << "| Final score range | " << fixed(s.min, 0) << "-" << fixed(s.max, 0) << " |\n";
  }
  if (r.duration_minutes) {
    const auto& d = *r.duration_minutes;
    out << "| Mean duration | " << fixed(d.mean, 1) << " min |\n";
    out << "| Duration range | " << fixed(d.min, 1) << "-" << fixed(d.max, 1) << " min |\n";
  }
  out << "\n## Agreement on totals (0-20)\n\n| Metric | R1 | R2 |\n|---|---|---|\n";
  const char* labels[] = {"<=0 pt diff (exact)", "<=1 pt difference", "<=2 pt difference"};
  for (int k = 0; k < 3; ++k) {
    out << "| " << labels[k] << " | " << pct(within(r.round1, k)) << " | " << pct(within(r.round2, k)) << " |\n";
  }
  out << "| Mean max difference | " << fixed(r.round1.mean_max_diff) << " | " << fixed(r.round2.mean_max_diff)
      << " |\n";
  out << "| Alpha, dimension level (ordinal) | " << opt(r.round1.alpha_dimension) << " | "
      << opt(r.round2.alpha_dimension) << " |\n";
  out << "| Alpha, overall (" << to_string(r.overall_metric) << ") | " << opt(r.round1.alpha_overall) << " | "
      << opt(r.round2.alpha_overall) << " |\n";

  out << "\n## Dimensions\n\n| Dimension | Mean chair score | R2 within 1 pt | R2 alpha |\n|---|---|---|---|\n";
  for (const auto& [id, d] : r.dimension_agreement) {
    out << "| " << id << " | " << fixed(d.mean_chair) << " | " << pct(d.within1) << " | " << opt(d.alpha) << " |\n";
  }

  out << "\n## Convergence (mean R2 - R1 total)\n\n| Rater | Shift |\n|---|---|\n";
  for (const auto& [rater, shift] : r.shifts) out << "| " << rater << " | " << fixed(shift) << " |\n";

  out << "\n## Duration and score\n\n";
  if (r.duration_score) {
    const auto& c = *r.duration_score;
    out << "r = " << fixed(c.r) << ", 95% CI [" << fixed(c.ci_low) << ", " << fixed(c.ci_high)
        << "], p = " << fixed(c.p_value) << ", n = " << c.n << "\n";
  } else {
    out << "not computed\n";
  }

  out << "\n## Flags\n\n" << r.flags_summary.flagged_councils << " of " << r.councils
      << " councils carry at least one flag.\n\n";
  for (const auto& [kind, n] : r.flags_summary.by_kind) out << "- " << kind << ": " << n << "\n";
  if (!r.notes.empty()) {
    out << "\n## Notes\n\n";
    for (const auto& n : r.notes) out << "- " << n << "\n";
  }
  return out.str();
}

}  // namespace viva
