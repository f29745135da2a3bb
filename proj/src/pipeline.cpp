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

#include "crossrisk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "crossrisk/entanglement.hpp"
#include "crossrisk/parallel.hpp"
#include "crossrisk/planted.hpp"
#include "crossrisk/protocol.hpp"
#include "json.hpp"

namespace crossrisk::pipeline {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

[[noreturn]] void BadConfig(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, "config: " + msg);
}

std::uint64_t ParseSeed(const std::string& address, std::size_t prefix) {
  const std::string digits = address.substr(prefix);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "bad seed in backend address " + address);
  }
  try {
    return std::stoull(digits);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad seed in backend address " + address);
  }
}

fs::path ResponsesPath(const fs::path& dir, const std::string& task) {
  return dir / "responses" / (task + ".jsonl");
}

fs::path SeriesPath(const fs::path& dir, const std::string& task) {
  return dir / "series" / (task + ".json");
}

fs::path ProfilePath(const fs::path& dir, RiskTag risk) {
  return dir / ("profile_" + std::string(RiskTagName(risk)) + ".jsonl");
}

fs::path ConflictPath(const fs::path& dir, RiskTag a, RiskTag b) {
  return dir / ("conflict_" + std::string(RiskTagName(a)) + "_" +
                std::string(RiskTagName(b)) + ".jsonl");
}

// Probe pairs of one risk, capped at the configured probe count.
std::vector<model::PromptAnswerPair> ProbesFor(
    const std::vector<model::PromptAnswerPair>& all, RiskTag risk, int cap) {
  std::vector<model::PromptAnswerPair> out;
  for (const auto& p : all) {
    if (p.risk == risk && static_cast<int>(out.size()) < cap) out.push_back(p);
  }
  return out;
}

std::vector<model::PromptAnswerPair> LoadProbes(const StudyConfig& config) {
  auto probes = io::ParseProbePairs(io::ReadFile(config.probes));
  std::set<std::string> ids;
  for (const auto& p : probes) {
    if (!ids.insert(p.id).second) {
      throw Error(ErrorCode::kFormat, "duplicate probe id " + p.id);
    }
  }
  return probes;
}

std::vector<eval::TaskManifest> LoadManifests(const StudyConfig& config) {
  std::vector<eval::TaskManifest> out;
  std::set<std::string> ids;
  for (const fs::path& p : config.tasks) {
    out.push_back(io::ParseManifest(io::ReadFile(p)));
    if (!ids.insert(out.back().task_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate task id " + out.back().task_id);
    }
  }
  return out;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string Signed(double v) {
  return (v > 0 ? "+" : "") + Fixed(v, 2) + "%";
}

}  // namespace

void StageStatus::Merge(const StageStatus& other) {
  partial = partial || other.partial;
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

StudyConfig ParseStudyConfig(std::string_view text, const fs::path& base_dir) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) BadConfig("not a JSON object");
  if (j.value("format_version", 0) != io::kFormatVersion) {
    BadConfig("missing or unsupported format_version");
  }
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  StudyConfig c;
  try {
    c.model_pair = j.value("model_pair", c.model_pair);
    c.base_backend = j.value("base", std::string());
    c.defense_backend = j.value("defense", std::string());
    for (const auto& t : j.value("tasks", json::array())) {
      c.tasks.push_back(resolve(t.get<std::string>()));
    }
    if (j.contains("probes")) c.probes = resolve(j["probes"].get<std::string>());
    for (const auto& pr : j.value("risk_pairs", json::array())) {
      if (!pr.is_array() || pr.size() != 2) BadConfig("risk_pairs entries must be [a, b]");
      c.risk_pairs.emplace_back(ParseRiskTag(pr[0].get<std::string>()),
                                ParseRiskTag(pr[1].get<std::string>()));
    }
    c.trials = j.value("trials", c.trials);
    c.trial_seed_base = j.value("trial_seed_base", c.trial_seed_base);
    c.max_new_tokens = j.value("max_new_tokens", c.max_new_tokens);
    if (j.contains("generation_temperature") && !j["generation_temperature"].is_null()) {
      c.generation_temperature = j["generation_temperature"].get<double>();
    }
    c.workers = j.value("workers", c.workers);
    c.ig.steps = j.value("ig_steps", c.ig.steps);
    c.selection.z_percent = j.value("z_percent", c.selection.z_percent);
    c.selection.p_percent = j.value("p_percent", c.selection.p_percent);
    c.selection.probe_count = j.value("probe_count", c.selection.probe_count);
    if (j.contains("band")) {
      const json& b = j["band"];
      if (!b.is_array() || b.size() != 2) BadConfig("band must be [low, high]");
      c.band = {b[0].get<double>(), b[1].get<double>()};
    }
    if (j.contains("toxicity") && j["toxicity"].is_object()) {
      const json& t = j["toxicity"];
      if (t.contains("endpoint") && t["endpoint"].is_string()) {
        eval::HttpScorerConfig h;
        h.endpoint = t["endpoint"].get<std::string>();
        h.key = t.value("key", std::string());
        h.retries = t.value("retries", h.retries);
        h.max_in_flight = t.value("max_in_flight", h.max_in_flight);
        h.timeout_ms = t.value("timeout_ms", h.timeout_ms);
        c.toxicity_endpoint = h;
      }
    }
    for (const auto& r : j.value("accuracy_rules", json::array())) {
      c.accuracy_rules.push_back({r.at("pattern").get<std::string>(),
                                  r.at("label").get<std::string>()});
    }
  } catch (const json::exception& e) {
    BadConfig(e.what());
  }
  ValidateStudyConfig(c);
  return c;
}

StudyConfig LoadStudyConfig(const fs::path& path) {
  return ParseStudyConfig(io::ReadFile(path), path.parent_path());
}

void ValidateStudyConfig(const StudyConfig& c) {
  if (c.model_pair.empty()) BadConfig("empty model_pair");
  if (c.trials < 1) BadConfig("trials must be at least 1");
  if (c.max_new_tokens < 1 || c.max_new_tokens > eval::kMaxResponseTokens) {
    BadConfig("max_new_tokens must be in [1, 512]");
  }
  if (c.workers < 1) BadConfig("workers must be at least 1");
  if (c.ig.steps < 1) BadConfig("ig_steps must be at least 1");
  attribution::ValidateSelectionConfig(c.selection);
  quant::ValidateBand(c.band);
  for (const auto& [a, b] : c.risk_pairs) {
    if (a == b) BadConfig("a risk pair needs two different risks");
  }
}

std::shared_ptr<const model::Backend> OpenBackend(const std::string& address) {
  if (address.rfind("toy:", 0) == 0) {
    model::ModelSpec spec;
    spec.seed = ParseSeed(address, 4);
    return std::make_shared<model::ToyBackend>(model::BuildToyModel(spec));
  }
  if (address.rfind("planted-defense:", 0) == 0) {
    return std::make_shared<model::ToyBackend>(model::BuildPlantedModel(
        ParseSeed(address, 16), model::kPlantedDefenseScale));
  }
  if (address.rfind("planted:", 0) == 0) {
    return std::make_shared<model::ToyBackend>(
        model::BuildPlantedModel(ParseSeed(address, 8)));
  }
  if (address.rfind("tcp://", 0) == 0 || address.rfind("stdio:", 0) == 0) {
    return protocol::ConnectBackend(address);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown backend address '" + address + "'");
}

StageStatus Evaluate(const StudyConfig& config, const model::Backend& backend,
                     const fs::path& dir) {
  StageStatus status;
  const eval::LexiconRefusalDetector refusal;
  const eval::LexiconToxicityScorer lexicon;
  std::unique_ptr<eval::HttpToxicityScorer> remote;
  std::optional<eval::HttpScorerConfig> endpoint = config.toxicity_endpoint;
  if (!endpoint) endpoint = eval::HttpToxicityScorer::ConfigFromEnvironment();
  if (endpoint) remote = std::make_unique<eval::HttpToxicityScorer>(*endpoint);

  eval::Scorers scorers;
  scorers.refusal = &refusal;
  scorers.toxicity = remote ? static_cast<const eval::ToxicityScorer*>(remote.get()) : &lexicon;
  scorers.accuracy.rules = config.accuracy_rules;
  scorers.workers = config.workers;

  eval::RunOptions options;
  options.trials = config.trials;
  options.trial_seed_base = config.trial_seed_base;
  options.max_new_tokens = config.max_new_tokens;
  options.generation_temperature = config.generation_temperature;
  options.workers = config.workers;

  for (const eval::TaskManifest& manifest : LoadManifests(config)) {
    const fs::path rpath = ResponsesPath(dir, manifest.task_id);
    std::optional<eval::ResponseSet> prior;
    if (fs::exists(rpath)) prior = io::ParseResponses(io::ReadFile(rpath));
    if (prior && prior->trial_count != options.trials) prior.reset();
    const eval::ResponseSet responses =
        eval::RunTask(backend, manifest, options, prior ? &*prior : nullptr);
    io::WriteFile(rpath, io::EmitResponses(responses));

    std::size_t errors = 0;
    for (const auto& r : responses.records) errors += r.error.has_value();
    if (errors == responses.records.size()) {
      // Nothing came back at all; a dead backend, not a partial run.
      const std::string first = responses.records.empty() ? "" : *responses.records[0].error;
      const bool unreachable =
          first.rfind(ErrorCodeName(ErrorCode::kBackendUnreachable), 0) == 0;
      throw Error(unreachable ? ErrorCode::kBackendUnreachable : ErrorCode::kBackend,
                  "every request for task " + manifest.task_id + " failed: " + first);
    }
    if (errors > 0) {
      status.partial = true;
      status.warnings.push_back(manifest.task_id + ": " + std::to_string(errors) +
                                " failed responses");
    }
    const quant::MetricSeries series = eval::ScoreTask(responses, manifest, scorers);
    if (series.partial) status.partial = true;
    io::WriteFile(SeriesPath(dir, manifest.task_id), io::EmitSeries(series));
  }
  return status;
}

StageStatus Quantify(const std::string& model_pair, const fs::path& before_dir,
                     const fs::path& after_dir, const fs::path& out_dir) {
  using Key = std::pair<std::string, quant::MetricKind>;
  auto load = [](const fs::path& dir) {
    std::map<Key, quant::MetricSeries> out;
    const fs::path series_dir = dir / "series";
    if (!fs::is_directory(series_dir)) {
      throw Error(ErrorCode::kIo, "no series directory in " + dir.string());
    }
    for (const auto& entry : fs::directory_iterator(series_dir)) {
      if (entry.path().extension() != ".json") continue;
      quant::MetricSeries s = io::ParseSeries(io::ReadFile(entry.path()));
      Key key{s.task_id, s.kind};
      out.emplace(std::move(key), std::move(s));
    }
    return out;
  };
  const auto before = load(before_dir);
  const auto after = load(after_dir);

  StageStatus status;
  std::vector<io::QuantRow> rows;
  std::vector<quant::RiskChange> changes;
  for (const auto& [key, b] : before) {
    const auto it = after.find(key);
    if (it == after.end()) {
      status.partial = true;
      status.warnings.push_back(key.first + ": no matching series after defense, skipped");
      continue;
    }
    const quant::MetricSeries& a = it->second;
    if (b.partial || a.partial) {
      status.partial = true;
      status.warnings.push_back(key.first + ": scored from partial responses");
    }
    io::QuantRow row;
    row.model_pair = model_pair;
    row.change = quant::Quantify(b, a);
    if (row.change.degenerate) {
      status.warnings.push_back(key.first + ": zero baseline, RCR undefined");
    }
    changes.push_back(row.change);
    rows.push_back(std::move(row));
  }
  for (const auto& [key, a] : after) {
    if (!before.contains(key)) {
      status.partial = true;
      status.warnings.push_back(key.first + ": no matching series before defense, skipped");
    }
  }
  io::WriteFile(out_dir / "quant.jsonl", io::EmitQuantRows(rows));
  io::WriteFile(out_dir / "quant.csv", io::QuantRowsCsv(rows));
  io::RadarSummary radar{model_pair, quant::AggregateRadarBySubDimension(changes)};
  io::WriteFile(out_dir / "radar.json", io::EmitRadar(radar));
  return status;
}

StageStatus Attribute(const StudyConfig& config, const model::Backend& base,
                      const fs::path& dir) {
  StageStatus status;
  const auto probes = LoadProbes(config);
  for (RiskTag risk : {RiskTag::kSafety, RiskTag::kFairness, RiskTag::kPrivacy}) {
    const auto pairs = ProbesFor(probes, risk, config.selection.probe_count);
    if (pairs.empty()) continue;
    std::vector<attribution::NeuronAttributions> per_prompt;
    std::vector<io::AttributionRow> rows;
    for (const auto& pair : pairs) {
      per_prompt.push_back(attribution::AttributeAll(base, pair, config.ig, config.workers));
      auto r = io::AttributionRows(per_prompt.back(), risk, config.selection.z_percent);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    io::WriteFile(dir / ("attribution_" + std::string(RiskTagName(risk)) + ".jsonl"),
                  io::EmitAttributionRows(rows));
    io::ProfileFile profile{attribution::SelectRiskNeurons(per_prompt, config.selection, risk),
                            config.selection};
    io::WriteFile(ProfilePath(dir, risk), io::EmitProfile(profile));
    if (profile.profile.neurons.empty()) {
      status.warnings.push_back(std::string(RiskTagName(risk)) + ": no neuron reached the support threshold");
    }
  }
  return status;
}

StageStatus Entangle(const StudyConfig& config, const fs::path& dir) {
  StageStatus status;
  for (const auto& [a, b] : config.risk_pairs) {
    const auto pa = io::ParseProfile(io::ReadFile(ProfilePath(dir, a)));
    const auto pb = io::ParseProfile(io::ReadFile(ProfilePath(dir, b)));
    const auto conflict = entanglement::ConflictEntangled(pa.profile, pb.profile);
    io::WriteFile(ConflictPath(dir, a, b),
                  io::EmitConflictReport(io::MakeConflictReport(conflict)));
    if (conflict.conflict.empty()) {
      status.warnings.push_back(std::string(RiskTagName(a)) + "/" +
                                std::string(RiskTagName(b)) + ": no conflict neurons");
    }
  }
  return status;
}

StageStatus Trend(const StudyConfig& config, const model::Backend& base,
                  const model::Backend& defense, const fs::path& dir,
                  const fs::path& quant_path) {
  StageStatus status;
  const auto probes = LoadProbes(config);
  std::vector<io::QuantRow> quant_rows = io::ParseQuantRows(io::ReadFile(quant_path));
  std::vector<io::QuantRow> verdicts;

  auto capture = [&](const model::Backend& backend,
                     const std::vector<model::PromptAnswerPair>& pairs) {
    std::vector<model::ActivationSnapshot> out(pairs.size());
    ParallelFor(pairs.size(), config.workers,
                [&](std::size_t i) { out[i] = backend.CaptureActivations(pairs[i]); });
    return out;
  };

  for (const auto& [a, b] : config.risk_pairs) {
    const auto pa = io::ParseProfile(io::ReadFile(ProfilePath(dir, a))).profile;
    const auto pb = io::ParseProfile(io::ReadFile(ProfilePath(dir, b))).profile;
    io::ConflictReport report = io::ParseConflictReport(io::ReadFile(ConflictPath(dir, a, b)));
    const entanglement::ConflictSet conflict = io::ConflictSetFromReport(report);

    std::vector<model::PromptAnswerPair> pairs = ProbesFor(probes, a, config.selection.probe_count);
    const auto more = ProbesFor(probes, b, config.selection.probe_count);
    pairs.insert(pairs.end(), more.begin(), more.end());

    std::optional<entanglement::TrendReport> trend_a, trend_b;
    if (!conflict.conflict.empty()) {
      const auto deltas = entanglement::ActivationDeltas(capture(base, pairs),
                                                         capture(defense, pairs), conflict);
      trend_a = entanglement::NTrend(deltas, pa, conflict);
      trend_b = entanglement::NTrend(deltas, pb, conflict);
      std::map<NeuronRef, double> by_neuron;
      for (const auto& d : deltas) by_neuron[d.neuron] = d.delta;
      for (io::ConflictRow& row : report.rows) {
        if (!row.conflict) continue;
        const double d = by_neuron.at(row.neuron);
        row.delta = d;
        row.aligned_a = d != 0.0 && (d > 0) == (row.summary_a > 0);
        row.aligned_b = d != 0.0 && (d > 0) == (row.summary_b > 0);
      }
    }

    for (auto [target, trend] : {std::pair{a, &trend_a}, std::pair{b, &trend_b}}) {
      std::map<std::string, std::vector<quant::RiskChange>> by_sub;
      for (const io::QuantRow& q : quant_rows) {
        if (q.change.risk == target) by_sub[q.change.sub_dimension].push_back(q.change);
      }
      for (const auto& [sub, group] : by_sub) {
        io::QuantRow v;
        v.model_pair = quant_rows.front().model_pair;
        v.change = CombineChanges(group);
        v.note = "pair=" + std::string(RiskTagName(a)) + "/" + std::string(RiskTagName(b));
        if (v.change.degenerate) {
          v.verdict = Verdict::kUncertain;
          if (*trend) v.n_trend = (*trend)->n_trend;
          v.note += "; degenerate-baseline";
          status.warnings.push_back(sub + ": zero baseline, verdict left uncertain");
        } else {
          const auto cv = quant::ClassifyConsistency(v.change, *trend ? &**trend : nullptr,
                                                     config.band);
          v.verdict = cv.verdict;
          v.n_trend = cv.n_trend;
          if (!cv.note.empty()) v.note += "; " + cv.note;
        }
        verdicts.push_back(std::move(v));
      }
    }
    report.trend_a = trend_a;
    report.trend_b = trend_b;
    io::WriteFile(ConflictPath(dir, a, b), io::EmitConflictReport(report));
  }
  io::WriteFile(dir / "verdicts.jsonl", io::EmitQuantRows(verdicts));
  io::WriteFile(dir / "verdicts.csv", io::QuantRowsCsv(verdicts));
  return status;
}

quant::RiskChange CombineChanges(std::span<const quant::RiskChange> group) {
  if (group.empty()) throw Error(ErrorCode::kInvalidArgument, "empty change group");
  if (group.size() == 1) return group.front();
  quant::RiskChange out;
  out.risk = group.front().risk;
  out.sub_dimension = group.front().sub_dimension;
  out.kind = group.front().kind;
  double signed_sum = 0.0, before = 0.0, after = 0.0;
  int used = 0;
  for (const quant::RiskChange& c : group) {
    out.task_id += (out.task_id.empty() ? "" : "+") + c.task_id;
    before += c.mean_before;
    after += c.mean_after;
    out.significant = out.significant || c.significant;
    if (c.degenerate || !c.rcr_percent) continue;
    const double sign = c.direction == quant::Direction::kIncreasedRisk   ? 1.0
                        : c.direction == quant::Direction::kDecreasedRisk ? -1.0
                                                                          : 0.0;
    signed_sum += sign * *c.rcr_percent;
    ++used;
  }
  out.mean_before = before / group.size();
  out.mean_after = after / group.size();
  if (used == 0) {
    out.degenerate = true;
    return out;
  }
  const double mean = signed_sum / used;
  out.rcr_percent = std::fabs(mean);
  out.direction = mean > 0   ? quant::Direction::kIncreasedRisk
                  : mean < 0 ? quant::Direction::kDecreasedRisk
                             : quant::Direction::kUnchanged;
  return out;
}

StageStatus RunStudy(const StudyConfig& config, const model::Backend& base,
                     const model::Backend& defense, const fs::path& dir) {
  StageStatus status;
  status.Merge(Evaluate(config, base, dir / "base"));
  status.Merge(Evaluate(config, defense, dir / "defense"));
  status.Merge(Quantify(config.model_pair, dir / "base", dir / "defense", dir));
  status.Merge(Attribute(config, base, dir));
  status.Merge(Entangle(config, dir));
  status.Merge(Trend(config, base, defense, dir, dir / "quant.jsonl"));
  io::WriteFile(dir / "report.md", RenderReport(dir));
  return status;
}

std::string TrendBar(double value, int width) {
  const int filled = static_cast<int>(std::lround(std::clamp(value, 0.0, 1.0) * width));
  return "[" + std::string(filled, '#') + std::string(width - filled, '.') + "]";
}

std::string RenderReport(const fs::path& dir) {
  std::string out;
  if (fs::exists(dir / "quant.jsonl")) {
    const auto rows = io::ParseQuantRows(io::ReadFile(dir / "quant.jsonl"));
    out += "# Risk changes: " + (rows.empty() ? std::string("-") : rows.front().model_pair) + "\n\n";
    out += "| task | risk | sub-dimension | metric | before | after | RCR | direction | p | significant |\n";
    out += "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const io::QuantRow& r : rows) {
      const quant::RiskChange& c = r.change;
      char p[32] = "-";
      if (c.p_value) std::snprintf(p, sizeof p, "%.3g", *c.p_value);
      out += "| " + c.task_id + " | " + std::string(RiskTagName(c.risk)) + " | " +
             c.sub_dimension + " | " + std::string(quant::MetricKindName(c.kind)) + " | " +
             Fixed(c.mean_before, 3) + " | " + Fixed(c.mean_after, 3) + " | " +
             (c.rcr_percent ? Fixed(*c.rcr_percent, 2) + "%" : std::string("undefined")) +
             " | " + std::string(quant::DirectionName(c.direction)) + " | " + p + " | " +
             (c.significant ? "yes" : "no") + " |\n";
    }
    out += "\n";
  }
  if (fs::exists(dir / "verdicts.jsonl")) {
    const auto rows = io::ParseQuantRows(io::ReadFile(dir / "verdicts.jsonl"));
    out += "## Trend consistency\n\n";
    out += "| risk | sub-dimension | direction | N_trend | verdict | note |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const io::QuantRow& r : rows) {
      out += "| " + std::string(RiskTagName(r.change.risk)) + " | " + r.change.sub_dimension +
             " | " + std::string(quant::DirectionName(r.change.direction)) + " | " +
             (r.n_trend ? Fixed(*r.n_trend, 2) : std::string("-")) + " | " +
             (r.verdict ? std::string(io::VerdictMark(*r.verdict)) + " " +
                              std::string(VerdictName(*r.verdict))
                        : std::string("-")) +
             " | " + r.note + " |\n";
    }
    out += "\n";
  }
  if (fs::exists(dir / "radar.json")) {
    const auto radar = io::ParseRadar(io::ReadFile(dir / "radar.json"));
    out += "## Radar (significant changes only)\n\n";
    for (const quant::RadarEntry& e : radar.entries) {
      out += "- " + e.sub_dimension + ": ";
      if (e.no_data) {
        out += "no data\n";
        continue;
      }
      out += Signed(e.signed_value()) + " (" + std::string(quant::DirectionName(e.direction)) +
             (e.direction_tie ? ", direction tie" : "") + ", " + std::to_string(e.used) +
             " task(s))\n";
    }
    out += "\n";
  }
  std::vector<fs::path> conflicts;
  if (fs::exists(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("conflict_", 0) == 0 && entry.path().extension() == ".jsonl") {
        conflicts.push_back(entry.path());
      }
    }
  }
  std::sort(conflicts.begin(), conflicts.end());
  if (!conflicts.empty()) out += "## Neuron trends\n\n";
  for (const fs::path& p : conflicts) {
    const auto r = io::ParseConflictReport(io::ReadFile(p));
    int n_conflict = 0;
    for (const auto& row : r.rows) n_conflict += row.conflict;
    out += "### " + std::string(RiskTagName(r.risk_a)) + " / " +
           std::string(RiskTagName(r.risk_b)) + ": " + std::to_string(r.rows.size()) +
           " entangled, " + std::to_string(n_conflict) + " conflict\n\n";
    for (const auto& row : r.rows) {
      if (!row.conflict) continue;
      out += "- " + ToString(row.neuron) + ": summary " + Fixed(row.summary_a, 4) + " / " +
             Fixed(row.summary_b, 4);
      if (row.delta) out += ", delta " + Fixed(*row.delta, 4);
      out += "\n";
    }
    for (const auto& t : {r.trend_a, r.trend_b}) {
      if (!t) continue;
      out += "- toward " + std::string(RiskTagName(t->target_risk)) + ": " +
             TrendBar(t->n_trend) + " " + Fixed(t->n_trend, 2) + " (" +
             std::to_string(t->aligned_count) + "/" + std::to_string(t->total_count) + ")";
      out += "\n";
    }
    out += "\n";
  }
  if (out.empty()) out = "No stage outputs found in " + dir.string() + "\n";
  return out;
}

}  // namespace crossrisk::pipeline
