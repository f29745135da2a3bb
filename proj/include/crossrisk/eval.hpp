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

// Multi-trial task evaluation and response scoring.

#ifndef CROSSRISK_EVAL_HPP_
#define CROSSRISK_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crossrisk/common.hpp"
#include "crossrisk/model.hpp"
#include "crossrisk/quant.hpp"

namespace crossrisk::eval {

using quant::MetricKind;
using quant::MetricSeries;
using quant::Orientation;

inline constexpr int kDefaultTrials = 5;
inline constexpr int kMaxResponseTokens = 512;

enum class TaskKind { kGeneration, kClassification };

std::string_view TaskKindName(TaskKind kind);
TaskKind ParseTaskKind(std::string_view name);

struct TaskItem {
  std::string item_id;
  std::string prompt;
  std::optional<std::string> gold_label;
  std::vector<std::string> choices;
  std::vector<std::string> secrets;

  friend bool operator==(const TaskItem&, const TaskItem&) = default;
};

struct TaskManifest {
  int format_version = 1;
  std::string task_id;
  RiskTag risk = RiskTag::kSafety;
  std::string sub_dimension;
  TaskKind kind = TaskKind::kGeneration;
  MetricKind metric = MetricKind::kRta;
  Orientation orientation = Orientation::kHigherIsSafer;
  // Toxicity only: score just the responses that are not refusals, i.e.
  // the ones a jailbreak got through.
  bool success_filter = false;
  std::vector<TaskItem> items;

  friend bool operator==(const TaskManifest&, const TaskManifest&) = default;
};

// Classification items need gold labels, disclosure tasks need secrets,
// accuracy needs a classification task, ids must be unique.
void ValidateManifest(const TaskManifest& manifest);

struct ResponseRecord {
  std::string task_id;
  std::string item_id;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string text;
  std::optional<std::string> error;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

struct ResponseSet {
  std::string task_id;
  int trial_count = kDefaultTrials;
  // Manifest item order, then trial order.
  std::vector<ResponseRecord> records;
  // Items for which every trial failed.
  std::vector<std::string> failed_items;

  const ResponseRecord* Find(std::string_view item_id, int trial) const;
  friend bool operator==(const ResponseSet&, const ResponseSet&) = default;
};

struct RunOptions {
  int trials = kDefaultTrials;
  std::uint64_t trial_seed_base = 0;
  int max_new_tokens = kMaxResponseTokens;
  // Generation temperature; unset means the backend's default.
  std::optional<double> generation_temperature;
  int workers = 1;
};

// Classification runs at temperature 0, generation at the backend default.
// Trial t of every item uses seed trial_seed_base + t. Records present in
// `resume` without an error are reused verbatim. Backend failures are
// recorded per record and never abort the run.
ResponseSet RunTask(const model::Backend& backend, const TaskManifest& manifest,
                    const RunOptions& options,
                    const ResponseSet* resume = nullptr);

// ---- scorers ---------------------------------------------------------------

class RefusalDetector {
 public:
  virtual ~RefusalDetector() = default;
  virtual bool IsRefusal(std::string_view response) const = 0;
};

// Curated refusal phrases plus a sentence-initial apology/negation check.
class LexiconRefusalDetector : public RefusalDetector {
 public:
  LexiconRefusalDetector();
  bool IsRefusal(std::string_view response) const override;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

class ToxicityScorer {
 public:
  virtual ~ToxicityScorer() = default;
  // Score in [0, 1], or nullopt when the scorer could not produce one.
  virtual std::optional<double> Score(std::string_view text) const = 0;
};

// Sums the weights of whole-word lexicon hits (every occurrence counts) and
// caps the total at 1.
class LexiconToxicityScorer : public ToxicityScorer {
 public:
  LexiconToxicityScorer();
  explicit LexiconToxicityScorer(std::map<std::string, double> weights);
  std::optional<double> Score(std::string_view text) const override;

 private:
  std::map<std::string, double> weights_;
};

struct HttpScorerConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/score
  std::string key;
  int retries = 3;
  int max_in_flight = 4;
  int timeout_ms = 5000;
};

// POSTs {"text": ...} and expects {"score": x} with x in [0, 1]. The key, if
// any, is sent as a bearer token.
class HttpToxicityScorer : public ToxicityScorer {
 public:
  explicit HttpToxicityScorer(HttpScorerConfig config);
  ~HttpToxicityScorer() override;

  // Reads TOXICITY_ENDPOINT and TOXICITY_KEY; nullopt if no endpoint is set.
  static std::optional<HttpScorerConfig> ConfigFromEnvironment();

  std::optional<double> Score(std::string_view text) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct PatternRule {
  std::string pattern;  // ECMAScript regex, case-insensitive
  std::string label;

  friend bool operator==(const PatternRule&, const PatternRule&) = default;
};

// Stand-in for a model-based answer extractor; returns the extracted label.
using ExtractionHook = std::function<std::optional<std::string>(
    std::string_view response, const TaskItem& item)>;

struct AccuracyOptions {
  std::vector<PatternRule> rules;
  ExtractionHook extraction_hook;  // disabled when empty
};

// Extraction order: choice letter, gold keyword, pattern rules, hook.
bool IsCorrect(std::string_view response, const TaskItem& item,
               const AccuracyOptions& options = {});

// Exact containment after case folding and whitespace normalization.
bool Discloses(std::string_view response, const TaskItem& item);

std::string NormalizeText(std::string_view text);

MetricSeries ScoreAccuracy(const ResponseSet& responses,
                           const TaskManifest& manifest,
                           const AccuracyOptions& options = {});
MetricSeries ScoreRta(const ResponseSet& responses, const TaskManifest& manifest,
                      const RefusalDetector& detector);
MetricSeries ScoreTd(const ResponseSet& responses, const TaskManifest& manifest);
MetricSeries ScoreToxicity(const ResponseSet& responses,
                           const TaskManifest& manifest,
                           const ToxicityScorer& scorer,
                           const RefusalDetector* success_filter = nullptr,
                           int workers = 1);

struct Scorers {
  const RefusalDetector* refusal = nullptr;
  const ToxicityScorer* toxicity = nullptr;
  AccuracyOptions accuracy;
  int workers = 1;
};

// Dispatches on manifest.metric.
MetricSeries ScoreTask(const ResponseSet& responses, const TaskManifest& manifest,
                       const Scorers& scorers);

}  // namespace crossrisk::eval

#endif  // CROSSRISK_EVAL_HPP_
