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

// On-disk formats. Every record carries "format_version"; JSONL files are
// one JSON object per line. Emit* produce the file text and Parse* accept it
// back, so Parse(Emit(x)) == x for every type here. CSV output is for humans
// and is not read back.

#ifndef CROSSRISK_IO_HPP_
#define CROSSRISK_IO_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossrisk/attribution.hpp"
#include "crossrisk/entanglement.hpp"
#include "crossrisk/eval.hpp"
#include "crossrisk/model.hpp"
#include "crossrisk/quant.hpp"

namespace crossrisk::io {

inline constexpr int kFormatVersion = 1;

std::string ReadFile(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void WriteFile(const std::filesystem::path& path, std::string_view text);

// ---- task manifests and responses ------------------------------------------

std::string EmitManifest(const eval::TaskManifest& manifest);
eval::TaskManifest ParseManifest(std::string_view text);

std::string EmitResponses(const eval::ResponseSet& responses);
eval::ResponseSet ParseResponses(std::string_view text);

std::string EmitSeries(const quant::MetricSeries& series);
quant::MetricSeries ParseSeries(std::string_view text);

// ---- attribution -------------------------------------------------------------

std::string EmitProbePairs(std::span<const model::PromptAnswerPair> pairs);
std::vector<model::PromptAnswerPair> ParseProbePairs(std::string_view text);

struct AttributionRow {
  RiskTag risk = RiskTag::kSafety;
  std::string pair_id;
  NeuronRef neuron;
  double value = 0.0;
  int abs_rank = 0;
  bool selected = false;

  friend bool operator==(const AttributionRow&, const AttributionRow&) = default;
};

// One row per neuron, ranks and selection per the given z.
std::vector<AttributionRow> AttributionRows(
    const attribution::NeuronAttributions& attributions, RiskTag risk,
    double z_percent);
// Rebuilds per-pair attribution vectors (pairs in first-seen order).
std::vector<attribution::NeuronAttributions> AttributionsFromRows(
    std::span<const AttributionRow> rows, const NeuronSpace& space);

std::string EmitAttributionRows(std::span<const AttributionRow> rows);
std::vector<AttributionRow> ParseAttributionRows(std::string_view text);

struct ProfileFile {
  attribution::RiskNeuronProfile profile;
  attribution::SelectionConfig selection;

  friend bool operator==(const ProfileFile&, const ProfileFile&) = default;
};

std::string EmitProfile(const ProfileFile& file);
ProfileFile ParseProfile(std::string_view text);

// ---- entanglement ------------------------------------------------------------

// One entangled neuron. Deltas and alignment are filled in for conflict
// neurons once a trend has been computed.
struct ConflictRow {
  NeuronRef neuron;
  bool conflict = false;
  double summary_a = 0.0;  // signed summary toward risk_a
  double summary_b = 0.0;
  std::optional<double> delta;
  std::optional<bool> aligned_a;
  std::optional<bool> aligned_b;

  friend bool operator==(const ConflictRow&, const ConflictRow&) = default;
};

struct ConflictReport {
  RiskTag risk_a = RiskTag::kSafety;
  RiskTag risk_b = RiskTag::kSafety;
  std::vector<ConflictRow> rows;  // ascending neuron order
  std::optional<entanglement::TrendReport> trend_a;
  std::optional<entanglement::TrendReport> trend_b;

  friend bool operator==(const ConflictReport&, const ConflictReport&) = default;
};

ConflictReport MakeConflictReport(const entanglement::ConflictSet& conflict);
entanglement::ConflictSet ConflictSetFromReport(const ConflictReport& report);

std::string EmitConflictReport(const ConflictReport& report);
ConflictReport ParseConflictReport(std::string_view text);

// ---- quantification ----------------------------------------------------------

struct QuantRow {
  std::string model_pair;
  quant::RiskChange change;
  std::optional<Verdict> verdict;
  std::optional<double> n_trend;
  std::string note;

  friend bool operator==(const QuantRow&, const QuantRow&) = default;
};

std::string EmitQuantRows(std::span<const QuantRow> rows);
std::vector<QuantRow> ParseQuantRows(std::string_view text);
std::string QuantRowsCsv(std::span<const QuantRow> rows);

struct RadarSummary {
  std::string model_pair;
  std::vector<quant::RadarEntry> entries;

  friend bool operator==(const RadarSummary&, const RadarSummary&) = default;
};

std::string EmitRadar(const RadarSummary& radar);
RadarSummary ParseRadar(std::string_view text);

std::string_view VerdictMark(Verdict v);

}  // namespace crossrisk::io

#endif  // CROSSRISK_IO_HPP_
