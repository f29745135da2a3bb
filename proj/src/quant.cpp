/*
 * Copyright 2026 The crossrisk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "crossrisk/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/special_functions/beta.hpp>

namespace crossrisk::quant {
namespace {

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleVariance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

void CheckSeries(const MetricSeries& s, const char* which) {
  if (s.values.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(which) + " series '" + s.task_id + "' is empty");
  }
  for (double v : s.values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange,
                  std::string(which) + " series '" + s.task_id +
                      "' holds a value outside [0, 1]");
    }
  }
}

}  // namespace

std::string_view MetricKindName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kAccuracy:
      return "accuracy";
    case MetricKind::kToxicity:
      return "toxicity";
    case MetricKind::kRta:
      return "rta";
    case MetricKind::kTd:
      return "td";
  }
  return "unknown";
}

MetricKind ParseMetricKind(std::string_view name) {
  if (name == "accuracy") return MetricKind::kAccuracy;
  if (name == "toxicity") return MetricKind::kToxicity;
  if (name == "rta") return MetricKind::kRta;
  if (name == "td") return MetricKind::kTd;
  throw Error(ErrorCode::kFormat, "unknown metric kind '" + std::string(name) + "'");
}

std::string_view OrientationName(Orientation o) {
  return o == Orientation::kHigherIsRiskier ? "higher-is-riskier"
                                            : "higher-is-safer";
}

Orientation ParseOrientation(std::string_view name) {
  if (name == "higher-is-riskier") return Orientation::kHigherIsRiskier;
  if (name == "higher-is-safer") return Orientation::kHigherIsSafer;
  throw Error(ErrorCode::kFormat, "unknown risk orientation '" + std::string(name) + "'");
}

std::string_view DirectionName(Direction d) {
  switch (d) {
    case Direction::kIncreasedRisk:
      return "increased-risk";
    case Direction::kDecreasedRisk:
      return "decreased-risk";
    case Direction::kUnchanged:
      return "unchanged";
  }
  return "unknown";
}

Direction ParseDirection(std::string_view name) {
  if (name == "increased-risk") return Direction::kIncreasedRisk;
  if (name == "decreased-risk") return Direction::kDecreasedRisk;
  if (name == "unchanged") return Direction::kUnchanged;
  throw Error(ErrorCode::kFormat, "unknown direction '" + std::string(name) + "'");
}

Orientation DefaultOrientation(MetricKind kind, std::string_view sub_dimension) {
  switch (kind) {
    case MetricKind::kToxicity:
    case MetricKind::kTd:
      return Orientation::kHigherIsRiskier;
    case MetricKind::kRta:
      return sub_dimension == "exaggerated-safety" ? Orientation::kHigherIsRiskier
                                                   : Orientation::kHigherIsSafer;
    case MetricKind::kAccuracy:
      return Orientation::kHigherIsSafer;
  }
  return Orientation::kHigherIsSafer;
}

double MetricSeries::mean() const { return Mean(values); }

RiskChange Rcr(const MetricSeries& before, const MetricSeries& after) {
  CheckSeries(before, "before");
  CheckSeries(after, "after");
  if (before.kind != after.kind || before.task_id != after.task_id ||
      before.risk != after.risk || before.sub_dimension != after.sub_dimension ||
      before.orientation != after.orientation) {
    throw Error(ErrorCode::kInvalidArgument,
                "mismatched series '" + before.task_id + "' vs '" +
                    after.task_id + "'");
  }
  RiskChange c;
  c.task_id = before.task_id;
  c.risk = before.risk;
  c.sub_dimension = before.sub_dimension;
  c.kind = before.kind;
  c.mean_before = before.mean();
  c.mean_after = after.mean();
  if (c.mean_before == 0.0) {
    c.degenerate = true;
  } else {
    c.rcr_percent =
        std::abs(c.mean_before - c.mean_after) / c.mean_before * 100.0;
  }
  if (c.mean_after == c.mean_before) {
    c.direction = Direction::kUnchanged;
  } else {
    const bool rose = c.mean_after > c.mean_before;
    const bool riskier = before.orientation == Orientation::kHigherIsRiskier;
    c.direction = rose == riskier ? Direction::kIncreasedRisk
                                  : Direction::kDecreasedRisk;
  }
  return c;
}

WelchResult WelchTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "t-test needs at least 2 values per series");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = Mean(a);
  const double mb = Mean(b);
  const double qa = SampleVariance(a, ma) / na;
  const double qb = SampleVariance(b, mb) / nb;
  const double se2 = qa + qb;

  WelchResult r;
  if (se2 == 0.0) {
    if (ma == mb) {
      r.t = 0.0;
      r.p_value = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.exact_separation = true;
    }
    r.df = na + nb - 2.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  // Two-sided tail of Student t: I_{df/(df+t^2)}(df/2, 1/2).
  const double x = r.df / (r.df + r.t * r.t);
  r.p_value = x >= 1.0 ? 1.0 : boost::math::ibeta(r.df / 2.0, 0.5, x);
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

double TTest(const MetricSeries& before, const MetricSeries& after) {
  return WelchTTest(before.values, after.values).p_value;
}

RiskChange Quantify(const MetricSeries& before, const MetricSeries& after) {
  RiskChange c = Rcr(before, after);
  const WelchResult w = WelchTTest(before.values, after.values);
  c.p_value = w.p_value;
  c.significant = w.p_value < kSignificanceLevel;
  c.exact_separation = w.exact_separation;
  return c;
}

double RadarEntry::signed_value() const {
  if (no_data || direction_tie) return 0.0;
  switch (direction) {
    case Direction::kIncreasedRisk:
      return magnitude;
    case Direction::kDecreasedRisk:
      return -magnitude;
    case Direction::kUnchanged:
      return 0.0;
  }
  return 0.0;
}

RadarEntry AggregateRadar(std::span<const RiskChange> group) {
  RadarEntry e;
  if (!group.empty()) e.sub_dimension = group.front().sub_dimension;
  std::vector<double> kept;
  int up = 0;
  int down = 0;
  for (const RiskChange& c : group) {
    if (!c.significant || c.degenerate || !c.rcr_percent) continue;
    kept.push_back(*c.rcr_percent);
    ++e.used;
    if (c.direction == Direction::kIncreasedRisk) ++up;
    if (c.direction == Direction::kDecreasedRisk) ++down;
  }
  if (e.used == 0) return e;
  // Summing in sorted order keeps the mean independent of input order.
  std::sort(kept.begin(), kept.end());
  double sum = 0.0;
  for (double v : kept) sum += v;
  e.no_data = false;
  e.magnitude = sum / e.used;
  if (up > down) {
    e.direction = Direction::kIncreasedRisk;
  } else if (down > up) {
    e.direction = Direction::kDecreasedRisk;
  } else {
    e.direction = Direction::kUnchanged;
    e.direction_tie = up > 0;
  }
  return e;
}

std::vector<RadarEntry> AggregateRadarBySubDimension(
    std::span<const RiskChange> changes) {
  std::map<std::string, std::vector<RiskChange>> groups;
  for (const RiskChange& c : changes) groups[c.sub_dimension].push_back(c);
  std::vector<RadarEntry> out;
  for (const auto& [name, group] : groups) {
    RadarEntry e = AggregateRadar(group);
    e.sub_dimension = name;
    out.push_back(e);
  }
  return out;
}

void ValidateBand(const Band& band) {
  if (!(band.low >= 0.0 && band.low <= band.high && band.high <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "uncertainty band must satisfy 0 <= low <= high <= 1");
  }
}

ConsistencyVerdict ClassifyConsistency(const RiskChange& change,
                                       const entanglement::TrendReport* report,
                                       const Band& band) {
  ValidateBand(band);
  if (change.degenerate) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot classify a degenerate risk change");
  }
  ConsistencyVerdict v;
  v.rcr_direction = change.direction;
  v.band = band;
  if (report == nullptr || report->total_count == 0) {
    v.verdict = Verdict::kUncertain;
    v.note = "no-conflict-neurons";
    return v;
  }
  v.n_trend = report->n_trend;
  if (report->moved_count == 0) {
    v.verdict = Verdict::kUncertain;
    v.note = "no-activation-change";
    return v;
  }
  if (change.direction == Direction::kUnchanged) {
    v.verdict = Verdict::kUncertain;
    v.note = "no-risk-change";
    return v;
  }
  if (report->n_trend >= band.low && report->n_trend <= band.high) {
    v.verdict = Verdict::kUncertain;
    return v;
  }
  const Direction trend = report->n_trend > 0.5 ? Direction::kIncreasedRisk
                                                : Direction::kDecreasedRisk;
  v.verdict = trend == change.direction ? Verdict::kConsistent
                                        : Verdict::kInconsistent;
  return v;
}

}  // namespace crossrisk::quant
