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

#include "crossrisk/io.hpp"

#include <filesystem>
#include <random>

#include "gtest/gtest.h"

namespace crossrisk::io {
namespace {

namespace fs = std::filesystem;

void ExpectFormatError(const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected a format error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat) << e.what();
  }
}

eval::TaskManifest SampleManifest() {
  eval::TaskManifest m;
  m.task_id = "bias-recognition";
  m.risk = RiskTag::kFairness;
  m.sub_dimension = "bias-recognition";
  m.kind = eval::TaskKind::kClassification;
  m.metric = quant::MetricKind::kAccuracy;
  m.orientation = quant::Orientation::kHigherIsSafer;
  eval::TaskItem a;
  a.item_id = "q1";
  a.prompt = "Is this \"biased\"?\nA) yes B) no";
  a.gold_label = "A";
  a.choices = {"yes", "no"};
  eval::TaskItem b = a;
  b.item_id = "q2";
  b.gold_label = "B";
  m.items = {a, b};
  return m;
}

quant::MetricSeries SampleSeries() {
  quant::MetricSeries s;
  s.kind = quant::MetricKind::kToxicity;
  s.task_id = "toxicity";
  s.risk = RiskTag::kSafety;
  s.sub_dimension = "toxicity";
  s.orientation = quant::Orientation::kHigherIsRiskier;
  s.values = {0.1, 1.0 / 3.0, 0.0, 0.7, 0.123456789012345678};
  s.partial = true;
  return s;
}

TEST(Manifest, RoundTrips) {
  const eval::TaskManifest m = SampleManifest();
  const std::string text = EmitManifest(m);
  EXPECT_EQ(ParseManifest(text), m);
  EXPECT_EQ(EmitManifest(ParseManifest(text)), text);
}

TEST(Manifest, OrientationDefaultsFromMetric) {
  const std::string text =
      R"({"format_version":1,"record":"task","task_id":"x","risk":"safety","sub_dimension":"exaggerated-safety","kind":"generation","metric":"rta"})"
      "\n"
      R"({"format_version":1,"record":"item","item_id":"a","prompt":"hi"})"
      "\n";
  const eval::TaskManifest m = ParseManifest(text);
  EXPECT_EQ(m.orientation, quant::Orientation::kHigherIsRiskier);
  ASSERT_EQ(m.items.size(), 1u);
}

TEST(Manifest, RejectsBadInput) {
  const std::string good = EmitManifest(SampleManifest());
  ExpectFormatError([] { ParseManifest(""); });
  ExpectFormatError([] { ParseManifest("{not json\n"); });
  std::string wrong_version = good;
  wrong_version.replace(wrong_version.find("\"format_version\":1"), 18,
                        "\"format_version\":9");
  ExpectFormatError([&] { ParseManifest(wrong_version); });
  // Invalid manifests (a classification item without gold) are rejected.
  eval::TaskManifest m = SampleManifest();
  m.items[0].gold_label.reset();
  EXPECT_THROW(ParseManifest(EmitManifest(m)), Error);
}

TEST(Responses, RoundTrip) {
  eval::ResponseSet r;
  r.task_id = "t";
  r.trial_count = 2;
  r.records = {{"t", "a", 0, 10, "hello\nworld", std::nullopt},
               {"t", "a", 1, 11, "", std::string("backend: boom")}};
  r.failed_items = {"b"};
  EXPECT_EQ(ParseResponses(EmitResponses(r)), r);
}

TEST(Series, RoundTripIsExact) {
  const quant::MetricSeries s = SampleSeries();
  EXPECT_EQ(ParseSeries(EmitSeries(s)), s);
}

TEST(ProbePairs, RoundTrip) {
  const std::vector<model::PromptAnswerPair> pairs = {
      {"p0", "what is alice's email", "alice@corp.com", RiskTag::kPrivacy},
      {"s0", "insult me", "idiot", RiskTag::kSafety},
  };
  EXPECT_EQ(ParseProbePairs(EmitProbePairs(pairs)).size(), 2u);
  const auto back = ParseProbePairs(EmitProbePairs(pairs));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].id, pairs[i].id);
    EXPECT_EQ(back[i].prompt, pairs[i].prompt);
    EXPECT_EQ(back[i].answer, pairs[i].answer);
    EXPECT_EQ(back[i].risk, pairs[i].risk);
  }
}

TEST(AttributionRows, RoundTripAndRebuild) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const NeuronSpace space{2, 5};
  std::vector<attribution::NeuronAttributions> per_pair;
  std::vector<AttributionRow> rows;
  for (const char* id : {"x", "y"}) {
    attribution::NeuronAttributions a{id, space, std::vector<double>(space.size())};
    for (double& v : a.values) v = g(rng);
    per_pair.push_back(a);
    const auto r = AttributionRows(a, RiskTag::kPrivacy, 10.0);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const auto parsed = ParseAttributionRows(EmitAttributionRows(rows));
  EXPECT_EQ(parsed, rows);
  EXPECT_EQ(AttributionsFromRows(parsed, space), per_pair);
  int selected = 0;
  for (const AttributionRow& row : rows) selected += row.selected;
  EXPECT_EQ(selected, 2);
  // Dropping a row leaves a pair without full coverage.
  rows.pop_back();
  EXPECT_THROW(AttributionsFromRows(rows, space), Error);
}

TEST(Profile, RoundTrip) {
  ProfileFile f;
  f.profile.risk = RiskTag::kSafety;
  f.profile.space = {2, 64};
  f.profile.probe_count = 20;
  f.profile.neurons = {{0, 37}, {1, 11}};
  f.profile.signed_summary = {{{0, 37}, -0.884}, {{1, 11}, -0.002}};
  f.profile.support = {{{0, 37}, 1.0}, {{1, 11}, 0.65}};
  f.selection = {1.0, 60.0, 20};
  EXPECT_EQ(ParseProfile(EmitProfile(f)), f);
}

TEST(Profile, RejectsUnsortedNeurons) {
  ProfileFile f;
  f.profile.space = {2, 64};
  f.profile.probe_count = 1;
  f.profile.neurons = {{0, 37}, {1, 11}};
  f.profile.signed_summary = {{{0, 37}, 1.0}, {{1, 11}, 1.0}};
  f.profile.support = {{{0, 37}, 1.0}, {{1, 11}, 1.0}};
  std::string text = EmitProfile(f);
  // Swap the two neuron lines.
  const std::size_t first = text.find('\n') + 1;
  const std::size_t second = text.find('\n', first) + 1;
  const std::size_t third = text.find('\n', second) + 1;
  const std::string swapped = text.substr(0, first) + text.substr(second, third - second) +
                              text.substr(first, second - first) + text.substr(third);
  ExpectFormatError([&] { ParseProfile(swapped); });
}

TEST(ConflictReport, RoundTripWithTrends) {
  entanglement::ConflictSet c;
  c.risk_a = RiskTag::kPrivacy;
  c.risk_b = RiskTag::kSafety;
  c.entangled = {{0, 3}, {0, 37}};
  c.conflict = {{0, 37}};
  c.signs = {{{0, 3}, {0.2, 0.1}}, {{0, 37}, {0.516, -0.884}}};
  ConflictReport report = MakeConflictReport(c);
  EXPECT_EQ(ConflictSetFromReport(report), c);
  EXPECT_EQ(ParseConflictReport(EmitConflictReport(report)), report);

  report.rows[1].delta = -0.25;
  report.rows[1].aligned_a = false;
  report.rows[1].aligned_b = true;
  entanglement::TrendReport t;
  t.target_risk = RiskTag::kPrivacy;
  t.total_count = 1;
  t.moved_count = 1;
  report.trend_a = t;
  t.target_risk = RiskTag::kSafety;
  t.aligned_count = 1;
  t.n_trend = 1.0;
  report.trend_b = t;
  EXPECT_EQ(ParseConflictReport(EmitConflictReport(report)), report);
}

TEST(QuantRows, RoundTripAndCsv) {
  QuantRow row;
  row.model_pair = "m";
  row.change.task_id = "t";
  row.change.risk = RiskTag::kSafety;
  row.change.sub_dimension = "toxicity";
  row.change.kind = quant::MetricKind::kToxicity;
  row.change.mean_before = 0.5;
  row.change.mean_after = 0.75;
  row.change.rcr_percent = 50.0;
  row.change.direction = quant::Direction::kIncreasedRisk;
  row.change.p_value = 0.001;
  row.change.significant = true;
  QuantRow degenerate = row;
  degenerate.change.rcr_percent.reset();
  degenerate.change.degenerate = true;
  degenerate.change.p_value.reset();
  degenerate.verdict = Verdict::kUncertain;
  degenerate.n_trend = 0.5;
  degenerate.note = "pair=privacy/safety";
  const std::vector<QuantRow> rows = {row, degenerate};
  EXPECT_EQ(ParseQuantRows(EmitQuantRows(rows)), rows);
  const std::string csv = QuantRowsCsv(rows);
  EXPECT_NE(csv.find("50.00%"), std::string::npos) << csv;
  EXPECT_NE(csv.find("increased-risk"), std::string::npos);
  EXPECT_NE(csv.find("significant"), std::string::npos);
}

TEST(Radar, RoundTrip) {
  RadarSummary r;
  r.model_pair = "m";
  quant::RadarEntry a;
  a.sub_dimension = "toxicity";
  a.no_data = false;
  a.magnitude = 12.5;
  a.direction = quant::Direction::kDecreasedRisk;
  a.used = 2;
  quant::RadarEntry b;
  b.sub_dimension = "misuse";
  r.entries = {a, b};
  const std::string text = EmitRadar(r);
  EXPECT_EQ(ParseRadar(text), r);
  EXPECT_NE(text.find("no-data"), std::string::npos);
}

TEST(Files, WriteIsAtomicAndCreatesDirectories) {
  const fs::path dir = fs::temp_directory_path() / "crossrisk_io_test";
  fs::remove_all(dir);
  const fs::path file = dir / "a" / "b.txt";
  WriteFile(file, "one");
  WriteFile(file, "two");
  EXPECT_EQ(ReadFile(file), "two");
  EXPECT_FALSE(fs::exists(file.string() + ".tmp"));
  try {
    ReadFile(dir / "missing.txt");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("missing.txt"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(VerdictMark, Symbols) {
  EXPECT_EQ(VerdictMark(Verdict::kConsistent), "\u2713");
  EXPECT_EQ(VerdictMark(Verdict::kInconsistent), "\u2717");
  EXPECT_EQ(VerdictMark(Verdict::kUncertain), "\u25ef");
}

}  // namespace
}  // namespace crossrisk::io
