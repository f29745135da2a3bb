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

// Before/after risk quantification: relative change rate, Welch t-test,
// significant-only radar aggregation and trend-consistency classification.

#ifndef CROSSRISK_QUANT_HPP_
#define CROSSRISK_QUANT_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crossrisk/common.hpp"
#include "crossrisk/entanglement.hpp"

namespace crossrisk::quant {

inline constexpr double kSignificanceLevel = 0.05;

enum class MetricKind { kAccuracy, kToxicity, kRta, kTd };
enum class Orientation { kHigherIsRiskier, kHigherIsSafer };
enum class Direction { kIncreasedRisk, kDecreasedRisk, kUnchanged };

std::string_view MetricKindName(MetricKind kind);
MetricKind ParseMetricKind(std::string_view name);
std::string_view OrientationName(Orientation o);
Orientation ParseOrientation(std::string_view name);
std::string_view DirectionName(Direction d);
Direction ParseDirection(std::string_view name);

// Default orientation of a metric on a sub-dimension. Refusal on
// exaggerated-safety prompts is risk-increasing; refusal elsewhere and
// accuracy are risk-decreasing; toxicity and disclosure are risk-increasing.
Orientation DefaultOrientation(MetricKind kind, std::string_view sub_dimension);

struct MetricSeries {
  MetricKind kind = MetricKind::kAccuracy;
  std::string task_id;
  RiskTag risk = RiskTag::kSafety;
  std::string sub_dimension;
  Orientation orientation = Orientation::kHigherIsSafer;
  std::vector<double> values;  // one per trial, each in [0, 1]
  bool partial = false;

  friend bool operator==(const MetricSeries&, const MetricSeries&) = default;

  double mean() const;
};

struct RiskChange {
  std::string task_id;
  RiskTag risk = RiskTag::kSafety;
  std::string sub_dimension;
  MetricKind kind = MetricKind::kAccuracy;
  double mean_before = 0.0;
  double mean_after = 0.0;
  std::optional<double> rcr_percent;  // unset when degenerate
  Direction direction = Direction::kUnchanged;
  std::optional<double> p_value;
  bool significant = false;
  bool degenerate = false;        // mean(before) == 0
  bool exact_separation = false;  // zero variances with different means

  friend bool operator==(const RiskChange&, const RiskChange&) = default;
};

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool exact_separation = false;
};

// Throws on mismatched kinds/tags or empty series. p_value stays unset.
RiskChange Rcr(const MetricSeries& before, const MetricSeries& after);

// Two-sample, two-sided Welch test. t is (mean(a) - mean(b)) / se.
WelchResult WelchTTest(std::span<const double> a, std::span<const double> b);
double TTest(const MetricSeries& before, const MetricSeries& after);

// Rcr plus the Welch p-value and significance flag.
RiskChange Quantify(const MetricSeries& before, const MetricSeries& after);

struct RadarEntry {
  std::string sub_dimension;
  bool no_data = true;
  double magnitude = 0.0;  // mean RCR percent over the retained entries
  Direction direction = Direction::kUnchanged;
  bool direction_tie = false;
  int used = 0;

  // +magnitude for increased risk, -magnitude for decreased, 0 otherwise.
  double signed_value() const;

  friend bool operator==(const RadarEntry&, const RadarEntry&) = default;
};

// Mean RCR over significant, non-degenerate entries of one group.
RadarEntry AggregateRadar(std::span<const RiskChange> group);

// AggregateRadar per sub-dimension, ordered by sub-dimension name.
std::vector<RadarEntry> AggregateRadarBySubDimension(
    std::span<const RiskChange> changes);

struct Band {
  double low = 0.45;
  double high = 0.55;
};

struct ConsistencyVerdict {
  Verdict verdict = Verdict::kUncertain;
  Direction rcr_direction = Direction::kUnchanged;
  std::optional<double> n_trend;
  Band band;
  std::string note;
};

// n_trend inside the band (inclusive) is uncertain. Otherwise n_trend above
// 0.5 reads as neurons moving toward the target risk (increased risk), below
// 0.5 as moving away, and the verdict is consistent iff that matches the
// task-level direction. A missing report (no conflict neurons), a report in
// which no conflict neuron moved, and an unchanged task metric are uncertain.
ConsistencyVerdict ClassifyConsistency(
    const RiskChange& change, const entanglement::TrendReport* report,
    const Band& band = {});

void ValidateBand(const Band& band);

}  // namespace crossrisk::quant

#endif  // CROSSRISK_QUANT_HPP_
