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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viva/errors.hpp"
#include "viva/model.hpp"

namespace viva {

enum class DistanceMetric { nominal, ordinal, interval };
std::string_view to_string(DistanceMetric m);
std::optional<DistanceMetric> parse_metric(std::string_view s);

/// Units x raters table of integer ratings with missing entries.
struct RatingMatrix {
  std::vector<std::string> units;
  std::vector<std::string> raters;
  std::vector<std::vector<std::optional<int>>> values;  // [unit][rater]
  int scale_min = 0;
  int scale_max = kScaleMax;

  RatingMatrix() = default;
  RatingMatrix(std::vector<std::string> unit_ids, std::vector<std::string> rater_ids, int min,
               int max);

  /// Adds the unit or rater on first use. Throws Error when out of scale.
  void set(const std::string& unit, const std::string& rater, int value);
  std::optional<int> get(std::size_t unit, std::size_t rater) const { return values[unit][rater]; }
};

/// Krippendorff's alpha, 1 - D_o / D_e, over the coincidence matrix of all
/// pairable values. Units with fewer than two ratings are ignored. Returns
/// exactly 1.0 when every pairable value is identical. Throws
/// UndefinedStatistic when no unit has two ratings.
double krippendorff_alpha(const RatingMatrix& matrix, DistanceMetric metric = DistanceMetric::ordinal);

/// One entry per unit: the scores the raters gave it.
using UnitScores = std::vector<std::vector<int>>;

/// Fraction of units whose score spread (max - min) is at most k. Throws
/// UndefinedStatistic on empty input or a unit with fewer than two scores.
double agreement_within_k(const UnitScores& units, int k);
/// Mean over units of (max - min).
double mean_max_difference(const UnitScores& units);

/// Per rater: mean over students of (round-2 total - round-1 total). Each
/// inner vector holds one student's assessments; r1 and r2 must cover the
/// same (student, rater) pairs, else Error.
std::map<std::string, double> convergence_shift(const std::vector<std::vector<Assessment>>& r1,
                                                const std::vector<std::vector<Assessment>>& r2);

/// Arithmetic mean of each dimension's score over the given assessments.
std::map<std::string, double> dimension_means(std::span<const Assessment> assessments);

struct Correlation {
  double r = 0.0;
  double ci_low = 0.0;   // 95% Fisher-z interval
  double ci_high = 0.0;
  double p_value = 1.0;  // two-sided, Student t with n-2 dof
  std::size_t n = 0;
};

/// Pearson correlation. Requires n >= 3 and equal lengths (Error);
/// zero variance in either input throws UndefinedStatistic.
Correlation pearson_correlation(std::span<const double> x, std::span<const double> y);

struct FlagThresholds {
  int dimension_spread = 2;  // flag when max - min >= this on any dimension
  int total_spread = 3;      // flag when max - min >= this on totals

  friend bool operator==(const FlagThresholds&, const FlagThresholds&) = default;
};

/// dimension_disagreement flags (in the first assessment's dimension order),
/// then an overall_divergence flag, for one council round.
std::vector<Flag> flag_assessments(std::span<const Assessment> round, const FlagThresholds& thresholds = {});

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

/// Throws UndefinedStatistic on empty input.
SummaryStats summarize(std::span<const double> values);

struct AgreementStats {
  std::optional<double> alpha_dimension;  // nullopt when undefined
  std::optional<double> alpha_overall;
  std::map<int, double> within_k;  // k = 0, 1, 2 over totals
  double mean_max_diff = 0.0;
  std::size_t units = 0;
};

/// Agreement of one council round across a cohort. Dimension-level alpha
/// uses (student, dimension) units on 0..4; overall alpha uses totals on
/// 0..20 with `overall_metric`.
AgreementStats round_agreement(const std::vector<std::vector<Assessment>>& per_student,
                               DistanceMetric overall_metric = DistanceMetric::ordinal);

struct DimensionAgreement {
  std::optional<double> alpha;
  double within1 = 0.0;
  double mean_chair = 0.0;
};

struct FlagsSummary {
  std::map<std::string, int> by_kind;  // kind -> number of flags
  int flagged_councils = 0;
};

struct ReliabilityReport {
  std::size_t councils = 0;
  DistanceMetric overall_metric = DistanceMetric::ordinal;
  AgreementStats round1;
  AgreementStats round2;
  std::map<std::string, double> shifts;           // rater -> mean r2 - r1
  std::map<std::string, double> dimension_means;  // chair scores
  std::map<std::string, DimensionAgreement> dimension_agreement;  // round 2
  std::optional<SummaryStats> chair_totals;
  std::optional<SummaryStats> duration_minutes;
  std::optional<Correlation> duration_score;
  FlagsSummary flags_summary;
  std::vector<std::string> notes;  // statistics that could not be computed
};

struct CouncilRecord {
  CouncilResult council;
  std::optional<TimestampMs> duration_ms;
};

/// Full cohort report. Throws UndefinedStatistic on an empty cohort.
ReliabilityReport build_report(const std::vector<CouncilRecord>& cohort,
                               DistanceMetric overall_metric = DistanceMetric::ordinal);

}  // namespace viva
