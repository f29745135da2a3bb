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

// Study stages over a base/defense model pair. Stage outputs:
//
//   evaluate   <dir>/responses/<task>.jsonl, <dir>/series/<task>.json
//   quantify   quant.jsonl, quant.csv, radar.json
//   attribute  attribution_<risk>.jsonl, profile_<risk>.jsonl
//   entangle   conflict_<a>_<b>.jsonl (deltas and trends added by trend)
//   trend      verdicts.jsonl, verdicts.csv
//   report     report.md
//
// RunStudy lays a whole study out as <dir>/base, <dir>/defense and the
// analysis files in <dir> itself.

#ifndef CROSSRISK_PIPELINE_HPP_
#define CROSSRISK_PIPELINE_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crossrisk/attribution.hpp"
#include "crossrisk/eval.hpp"
#include "crossrisk/io.hpp"
#include "crossrisk/model.hpp"
#include "crossrisk/quant.hpp"

namespace crossrisk::pipeline {

struct StudyConfig {
  std::string model_pair = "study";
  std::string base_backend;     // backend address, see OpenBackend
  std::string defense_backend;
  std::vector<std::filesystem::path> tasks;  // manifest files
  std::filesystem::path probes;              // probe pair file
  std::vector<std::pair<RiskTag, RiskTag>> risk_pairs;
  int trials = eval::kDefaultTrials;
  std::uint64_t trial_seed_base = 0;
  int max_new_tokens = eval::kMaxResponseTokens;
  std::optional<double> generation_temperature;
  int workers = 1;
  attribution::IGConfig ig;
  attribution::SelectionConfig selection;
  quant::Band band;
  std::optional<eval::HttpScorerConfig> toxicity_endpoint;
  std::vector<eval::PatternRule> accuracy_rules;
};

// Relative paths in the file resolve against its directory.
StudyConfig LoadStudyConfig(const std::filesystem::path& path);
StudyConfig ParseStudyConfig(std::string_view text,
                             const std::filesystem::path& base_dir);
void ValidateStudyConfig(const StudyConfig& config);

// Addresses: toy:SEED, planted:SEED, planted-defense:SEED, tcp://host:port,
// stdio:COMMAND.
std::shared_ptr<const model::Backend> OpenBackend(const std::string& address);

struct StageStatus {
  bool partial = false;
  std::vector<std::string> warnings;

  void Merge(const StageStatus& other);
};

// Runs and scores every task on one backend; resumes from responses
// already present in `dir`.
StageStatus Evaluate(const StudyConfig& config, const model::Backend& backend,
                     const std::filesystem::path& dir);

// Pairs the series of two evaluate directories by (task, metric). Unmatched
// series are reported and skipped.
StageStatus Quantify(const std::string& model_pair,
                     const std::filesystem::path& before_dir,
                     const std::filesystem::path& after_dir,
                     const std::filesystem::path& out_dir);

// Attribution and profile selection on the base model for every risk that
// has probe pairs; at most selection.probe_count pairs per risk.
StageStatus Attribute(const StudyConfig& config, const model::Backend& base,
                      const std::filesystem::path& dir);

StageStatus Entangle(const StudyConfig& config, const std::filesystem::path& dir);

// Activation deltas over the probe pairs of both risks of each pair, N_trend
// toward each risk, and one consistency verdict per (risk pair, target risk,
// sub-dimension) against the rows in `quant_path`.
StageStatus Trend(const StudyConfig& config, const model::Backend& base,
                  const model::Backend& defense, const std::filesystem::path& dir,
                  const std::filesystem::path& quant_path);

// Every stage in order, then report.md.
StageStatus RunStudy(const StudyConfig& config, const model::Backend& base,
                     const model::Backend& defense,
                     const std::filesystem::path& dir);

// Tasks sharing a sub-dimension collapse into one change: the mean signed
// RCR over non-degenerate tasks gives the direction and magnitude.
quant::RiskChange CombineChanges(std::span<const quant::RiskChange> group);

// Markdown report over whatever stage outputs exist in `dir`.
std::string RenderReport(const std::filesystem::path& dir);

// Text bar for a value in [0, 1].
std::string TrendBar(double value, int width = 20);

}  // namespace crossrisk::pipeline

#endif  // CROSSRISK_PIPELINE_HPP_
