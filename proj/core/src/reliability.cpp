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

#include "viva/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

namespace viva {
namespace {

std::size_t index_of(std::vector<std::string>& ids, const std::string& id) {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it != ids.end()) return static_cast<std::size_t>(it - ids.begin());
  ids.push_back(id);
  return ids.size() - 1;
}

int spread(const std::vector<int>& scores) {
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  return *hi - *lo;
}

void check_units(const UnitScores& units) {
  if (units.empty()) throw UndefinedStatistic("no units");
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].size() < 2) {
      throw UndefinedStatistic("unit " + std::to_string(i) + " has fewer than two scores");
    }
  }
}

std::map<std::string, const Assessment*> by_rater(const std::vector<Assessment>& v) {
  std::map<std::string, const Assessment*> out;
  for (const auto& a : v) out[a.rater_id] = &a;
  return out;
}

}  // namespace

std::string_view to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::nominal: return "nominal";
    case DistanceMetric::ordinal: return "ordinal";
    case DistanceMetric::interval: return "interval";
  }
  return "?";
}

std::optional<DistanceMetric> parse_metric(std::string_view s) {
  if (s == "nominal") return DistanceMetric::nominal;
  if (s == "ordinal") return DistanceMetric::ordinal;
  if (s == "interval") return DistanceMetric::interval;
  return std::nullopt;
}

RatingMatrix::RatingMatrix(std::vector<std::string> unit_ids, std::vector<std::string> rater_ids,
                           int min, int max)
    : units(std::move(unit_ids)), raters(std::move(rater_ids)), scale_min(min), scale_max(max) {
  values.assign(units.size(), std::vector<std::optional<int>>(raters.size()));
}

void RatingMatrix::set(const std::string& unit, const std::string& rater, int value) {
  if (value < scale_min || value > scale_max) {
    throw Error("rating " + std::to_string(value) + " for " + unit + "/" + rater + " outside " +
                std::to_string(scale_min) + ".." + std::to_string(scale_max));
  }
  const std::size_t u = index_of(units, unit);
  const std::size_t r = index_of(raters, rater);
  if (values.size() < units.size()) values.resize(units.size());
  for (auto& row : values) row.resize(raters.size());
  values[u][r] = value;
}

double krippendorff_alpha(const RatingMatrix& matrix, DistanceMetric metric) {
  std::set<int> distinct;
  std::vector<std::vector<int>> pairable;
  for (const auto& row : matrix.values) {
    std::vector<int> present;
    for (const auto& v : row) {
      if (v) present.push_back(*v);
    }
    if (present.size() >= 2) {
      distinct.insert(present.begin(), present.end());
      pairable.push_back(std::move(present));
    }
  }
  if (pairable.empty()) throw UndefinedStatistic("no unit has two or more ratings");

  const std::vector<int> cats(distinct.begin(), distinct.end());
  const std::size_t c = cats.size();
  auto pos = [&](int value) {
    return static_cast<std::size_t>(std::lower_bound(cats.begin(), cats.end(), value) - cats.begin());
  };

  // Coincidence matrix: each ordered pair within a unit weighs 1 / (m_u - 1).
  std::vector<std::vector<double>> o(c, std::vector<double>(c, 0.0));
  for (const auto& unit : pairable) {
    const double w = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t i = 0; i < unit.size(); ++i) {
      for (std::size_t j = 0; j < unit.size(); ++j) {
        if (i != j) o[pos(unit[i])][pos(unit[j])] += w;
      }
    }
  }
  std::vector<double> marg(c, 0.0);
  for (std::size_t a = 0; a < c; ++a) marg[a] = std::accumulate(o[a].begin(), o[a].end(), 0.0);
  const double n = std::accumulate(marg.begin(), marg.end(), 0.0);

  auto delta2 = [&](std::size_t a, std::size_t b) -> double {
    if (a == b) return 0.0;
    switch (metric) {
      case DistanceMetric::nominal: return 1.0;
      case DistanceMetric::interval: {
        const double d = cats[a] - cats[b];
        return d * d;
      }
      case DistanceMetric::ordinal: {
        const std::size_t lo = std::min(a, b), hi = std::max(a, b);
        double s = 0.0;
        for (std::size_t g = lo; g <= hi; ++g) s += marg[g];
        s -= (marg[lo] + marg[hi]) / 2.0;
        return s * s;
      }
    }
    return 0.0;
  };

  double observed = 0.0, expected = 0.0;
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      const double d = delta2(a, b);
      observed += o[a][b] * d;
      expected += marg[a] * marg[b] * d;
    }
  }
  if (expected == 0.0) return 1.0;  // a single value throughout: perfect agreement by convention
  return 1.0 - (n - 1.0) * observed / expected;
}

double agreement_within_k(const UnitScores& units, int k) {
  check_units(units);
  const auto hits = std::count_if(units.begin(), units.end(),
                                  [k](const std::vector<int>& u) { return spread(u) <= k; });
  return static_cast<double>(hits) / static_cast<double>(units.size());
}

double mean_max_difference(const UnitScores& units) {
  check_units(units);
  double sum = 0.0;
  for (const auto& u : units) sum += spread(u);
  return sum / static_cast<double>(units.size());
}

std::map<std::string, double> convergence_shift(const std::vector<std::vector<Assessment>>& r1,
                                                const std::vector<std::vector<Assessment>>& r2) {
  if (r1.size() != r2.size()) {
    throw Error("round 1 covers " + std::to_string(r1.size()) + " students, round 2 covers " +
                std::to_string(r2.size()));
  }
  std::map<std::string, double> sum;
  std::map<std::string, int> count;
  for (std::size_t s = 0; s < r1.size(); ++s) {
    const auto a = by_rater(r1[s]);
    const auto b = by_rater(r2[s]);
    if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin(),
                                            [](const auto& x, const auto& y) { return x.first == y.first; })) {
      throw Error("student " + std::to_string(s) + ": round 1 and round 2 rater sets differ");
    }
    for (const auto& [rater, first] : a) {
      sum[rater] += b.at(rater)->total - first->total;
      ++count[rater];
    }
  }
  std::map<std::string, double> out;
  for (const auto& [rater, total] : sum) out[rater] = total / count[rater];
  return out;
}

std::map<std::string, double> dimension_means(std::span<const Assessment> assessments) {
  std::map<std::string, double> sum;
  std::map<std::string, int> count;
  for (const auto& a : assessments) {
    for (const auto& s : a.scores) {
      sum[s.dimension_id] += s.score;
      ++count[s.dimension_id];
    }
  }
  for (auto& [dim, total] : sum) total /= count[dim];
  return sum;
}

Correlation pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("correlation inputs differ in length");
  if (x.size() < 3) throw Error("correlation needs at least 3 observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("zero variance in correlation input");

  Correlation c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(c.r) == 1.0) {
    c.ci_low = c.ci_high = c.r;
    c.p_value = 0.0;
    return c;
  }
  const double z = std::atanh(c.r);
  const double half = 1.959963984540054 / std::sqrt(n - 3.0);
  c.ci_low = std::tanh(z - half);
  c.ci_high = std::tanh(z + half);
  const double dof = n - 2.0;
  const double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
  boost::math::students_t dist(dof);
  c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return c;
}

std::vector<Flag> flag_assessments(std::span<const Assessment> round, const FlagThresholds& thresholds) {
  std::vector<Flag> flags;
  if (round.size() < 2) return flags;
  for (const auto& dim : round.front().scores) {
    std::vector<int> scores;
    std::string detail;
    for (const auto& a : round) {
      if (const auto* s = a.find(dim.dimension_id)) {
        scores.push_back(s->score);
        detail += (detail.empty() ? "" : ", ") + a.rater_id + "=" + std::to_string(s->score);
      }
    }
    if (scores.size() >= 2 && spread(scores) >= thresholds.dimension_spread) {
      flags.push_back({FlagKind::dimension_disagreement,
                       "dimension " + dim.dimension_id + ": " + detail + " (spread " +
                           std::to_string(spread(scores)) + ")",
                       static_cast<double>(thresholds.dimension_spread)});
    }
  }
  std::vector<int> totals;
  std::string detail;
  for (const auto& a : round) {
    totals.push_back(a.total);
    detail += (detail.empty() ? "" : ", ") + a.rater_id + "=" + std::to_string(a.total);
  }
  if (spread(totals) >= thresholds.total_spread) {
    flags.push_back({FlagKind::overall_divergence,
                     "totals: " + detail + " (spread " + std::to_string(spread(totals)) + ")",
                     static_cast<double>(thresholds.total_spread)});
  }
  return flags;
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw UndefinedStatistic("no values to summarize");
  SummaryStats s;
  s.n = values.size();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

AgreementStats round_agreement(const std::vector<std::vector<Assessment>>& per_student,
                               DistanceMetric overall_metric) {
  AgreementStats out;
  RatingMatrix dims({}, {}, 0, kScaleMax);
  RatingMatrix totals({}, {}, 0, kTotalMax);
  UnitScores total_units;
  for (std::size_t s = 0; s < per_student.size(); ++s) {
    const std::string unit = "s" + std::to_string(s);
    std::vector<int> unit_totals;
    for (const auto& a : per_student[s]) {
      for (const auto& d : a.scores) dims.set(unit + "." + d.dimension_id, a.rater_id, d.score);
      totals.set(unit, a.rater_id, a.total);
      unit_totals.push_back(a.total);
    }
    if (unit_totals.size() >= 2) total_units.push_back(std::move(unit_totals));
  }
  try {
    out.alpha_dimension = krippendorff_alpha(dims, DistanceMetric::ordinal);
  } catch (const UndefinedStatistic&) {
  }
  try {
    out.alpha_overall = krippendorff_alpha(totals, overall_metric);
  } catch (const UndefinedStatistic&) {
  }
  out.units = total_units.size();
  if (!total_units.empty()) {
    for (int k : {0, 1, 2}) out.within_k[k] = agreement_within_k(total_units, k);
    out.mean_max_diff = mean_max_difference(total_units);
  }
  return out;
}

ReliabilityReport build_report(const std::vector<CouncilRecord>& cohort, DistanceMetric overall_metric) {
  if (cohort.empty()) throw UndefinedStatistic("no council results to analyze");
  ReliabilityReport rep;
  rep.councils = cohort.size();
  rep.overall_metric = overall_metric;

  std::vector<std::vector<Assessment>> r1, r2;
  std::vector<Assessment> chairs;
  for (const auto& rec : cohort) {
    r1.push_back(rec.council.round1);
    r2.push_back(rec.council.round2);
    chairs.push_back(rec.council.chair);
    if (!rec.council.flags.empty()) ++rep.flags_summary.flagged_councils;
    for (const auto& f : rec.council.flags) ++rep.flags_summary.by_kind[std::string(to_string(f.kind))];
  }
  rep.round1 = round_agreement(r1, overall_metric);
  rep.round2 = round_agreement(r2, overall_metric);
  if (!rep.round1.alpha_dimension) rep.notes.push_back("round 1 dimension alpha undefined");
  if (!rep.round2.alpha_dimension) rep.notes.push_back("round 2 dimension alpha undefined");
  try {
    rep.shifts = convergence_shift(r1, r2);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("convergence shift: ") + e.what());
  }
  rep.dimension_means = dimension_means(chairs);

  for (const auto& dim : cohort.front().council.chair.scores) {
    const std::string& id = dim.dimension_id;
    RatingMatrix m({}, {}, 0, kScaleMax);
    UnitScores units;
    for (std::size_t s = 0; s < r2.size(); ++s) {
      std::vector<int> scores;
      for (const auto& a : r2[s]) {
        if (const auto* d = a.find(id)) {
          m.set("s" + std::to_string(s), a.rater_id, d->score);
          scores.push_back(d->score);
        }
      }
      if (scores.size() >= 2) units.push_back(std::move(scores));
    }
    DimensionAgreement da;
    try {
      da.alpha = krippendorff_alpha(m, DistanceMetric::ordinal);
    } catch (const UndefinedStatistic&) {
    }
    if (!units.empty()) da.within1 = agreement_within_k(units, 1);
    da.mean_chair = rep.dimension_means.count(id) ? rep.dimension_means.at(id) : 0.0;
    rep.dimension_agreement[id] = da;
  }

  std::vector<double> chair_totals, minutes, paired_totals;
  for (const auto& rec : cohort) {
    chair_totals.push_back(rec.council.chair.total);
    if (rec.duration_ms) {
      minutes.push_back(static_cast<double>(*rec.duration_ms) / 60000.0);
      paired_totals.push_back(rec.council.chair.total);
    }
  }
  rep.chair_totals = summarize(chair_totals);
  if (!minutes.empty()) rep.duration_minutes = summarize(minutes);
  if (minutes.size() >= 3) {
    try {
      rep.duration_score = pearson_correlation(minutes, paired_totals);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("duration-score correlation: ") + e.what());
    }
  } else {
    rep.notes.push_back("duration-score correlation needs at least 3 transcripts with durations");
  }
  return rep;
}

}  // namespace viva
