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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace crossrisk::io {
namespace {

using nlohmann::json;

[[noreturn]] void Bad(const std::string& msg) {
  throw Error(ErrorCode::kFormat, msg);
}

json Record(std::string_view kind) {
  json j;
  j["format_version"] = kFormatVersion;
  if (!kind.empty()) j["record"] = kind;
  return j;
}

void CheckVersion(const json& j) {
  if (!j.is_object()) Bad("record is not a JSON object");
  auto it = j.find("format_version");
  if (it == j.end()) Bad("record without format_version");
  if (!it->is_number_integer() || it->get<int>() != kFormatVersion) {
    Bad("unsupported format_version " + it->dump());
  }
}

std::vector<json> Lines(std::string_view text) {
  std::vector<json> out;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) Bad("line " + std::to_string(line_no) + ": invalid JSON");
      CheckVersion(j);
      out.push_back(std::move(j));
    }
    start = end + 1;
  }
  return out;
}

json Single(std::string_view text) {
  std::vector<json> lines = Lines(text);
  if (lines.size() != 1) Bad("expected exactly one JSON record");
  return lines.front();
}

std::string Join(const std::vector<json>& records) {
  std::string out;
  for (const json& j : records) {
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string_view RecordKind(const json& j) {
  auto it = j.find("record");
  if (it == j.end() || !it->is_string()) Bad("record without a record kind");
  return it->get_ref<const std::string&>();
}

template <typename T>
T Get(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) Bad(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    Bad(std::string("bad field '") + key + "': " + it->dump());
  }
}

template <typename T>
std::optional<T> GetOpt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return Get<T>(j, key);
}

double GetNumber(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) Bad(std::string("missing number '") + key + "'");
  return it->get<double>();
}

std::optional<double> GetOptNumber(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return GetNumber(j, key);
}

template <typename Fn>
auto Enum(const json& j, const char* key, Fn&& parse) {
  const std::string name = Get<std::string>(j, key);
  try {
    return parse(name);
  } catch (const Error&) {
    Bad(std::string("bad value for '") + key + "': " + name);
  }
}

template <typename T>
json Nullable(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

NeuronRef GetNeuron(const json& j) {
  return {Get<int>(j, "layer"), Get<int>(j, "neuron")};
}

json TrendJson(const entanglement::TrendReport& t) {
  json j;
  j["target_risk"] = RiskTagName(t.target_risk);
  j["n_trend"] = t.n_trend;
  j["aligned_count"] = t.aligned_count;
  j["total_count"] = t.total_count;
  j["moved_count"] = t.moved_count;
  j["verdict"] = t.verdict ? json(VerdictName(*t.verdict)) : json(nullptr);
  return j;
}

entanglement::TrendReport TrendFromJson(const json& j) {
  entanglement::TrendReport t;
  t.target_risk = Enum(j, "target_risk", ParseRiskTag);
  t.n_trend = GetNumber(j, "n_trend");
  t.aligned_count = Get<int>(j, "aligned_count");
  t.total_count = Get<int>(j, "total_count");
  t.moved_count = Get<int>(j, "moved_count");
  if (auto v = GetOpt<std::string>(j, "verdict")) t.verdict = ParseVerdict(*v);
  return t;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string General(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

// ---- manifests ---------------------------------------------------------------

std::string EmitManifest(const eval::TaskManifest& m) {
  std::vector<json> out;
  json h = Record("task");
  h["task_id"] = m.task_id;
  h["risk"] = RiskTagName(m.risk);
  h["sub_dimension"] = m.sub_dimension;
  h["kind"] = eval::TaskKindName(m.kind);
  h["metric"] = quant::MetricKindName(m.metric);
  h["orientation"] = quant::OrientationName(m.orientation);
  h["success_filter"] = m.success_filter;
  out.push_back(std::move(h));
  for (const eval::TaskItem& item : m.items) {
    json j = Record("item");
    j["item_id"] = item.item_id;
    j["prompt"] = item.prompt;
    if (item.gold_label) j["gold_label"] = *item.gold_label;
    if (!item.choices.empty()) j["choices"] = item.choices;
    if (!item.secrets.empty()) j["secrets"] = item.secrets;
    out.push_back(std::move(j));
  }
  return Join(out);
}

eval::TaskManifest ParseManifest(std::string_view text) {
  const std::vector<json> lines = Lines(text);
  if (lines.empty() || RecordKind(lines.front()) != "task") {
    Bad("manifest must start with a task record");
  }
  const json& h = lines.front();
  eval::TaskManifest m;
  m.task_id = Get<std::string>(h, "task_id");
  m.risk = Enum(h, "risk", ParseRiskTag);
  m.sub_dimension = Get<std::string>(h, "sub_dimension");
  m.kind = Enum(h, "kind", eval::ParseTaskKind);
  m.metric = Enum(h, "metric", quant::ParseMetricKind);
  m.orientation = h.contains("orientation")
                      ? Enum(h, "orientation", quant::ParseOrientation)
                      : quant::DefaultOrientation(m.metric, m.sub_dimension);
  m.success_filter = GetOpt<bool>(h, "success_filter").value_or(false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json& j = lines[i];
    if (RecordKind(j) != "item") Bad("unexpected record in manifest");
    eval::TaskItem item;
    item.item_id = Get<std::string>(j, "item_id");
    item.prompt = Get<std::string>(j, "prompt");
    item.gold_label = GetOpt<std::string>(j, "gold_label");
    item.choices = GetOpt<std::vector<std::string>>(j, "choices").value_or(std::vector<std::string>{});
    item.secrets = GetOpt<std::vector<std::string>>(j, "secrets").value_or(std::vector<std::string>{});
    m.items.push_back(std::move(item));
  }
  eval::ValidateManifest(m);
  return m;
}

// ---- responses ---------------------------------------------------------------

std::string EmitResponses(const eval::ResponseSet& r) {
  std::vector<json> out;
  json h = Record("responses");
  h["task_id"] = r.task_id;
  h["trial_count"] = r.trial_count;
  h["failed_items"] = r.failed_items;
  out.push_back(std::move(h));
  for (const eval::ResponseRecord& rec : r.records) {
    json j = Record("response");
    j["task_id"] = rec.task_id;
    j["item_id"] = rec.item_id;
    j["trial"] = rec.trial;
    j["seed"] = rec.seed;
    j["text"] = rec.text;
    if (rec.error) j["error"] = *rec.error;
    out.push_back(std::move(j));
  }
  return Join(out);
}

eval::ResponseSet ParseResponses(std::string_view text) {
  const std::vector<json> lines = Lines(text);
  if (lines.empty() || RecordKind(lines.front()) != "responses") {
    Bad("response file must start with a responses record");
  }
  eval::ResponseSet r;
  r.task_id = Get<std::string>(lines[0], "task_id");
  r.trial_count = Get<int>(lines[0], "trial_count");
  r.failed_items = Get<std::vector<std::string>>(lines[0], "failed_items");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json& j = lines[i];
    if (RecordKind(j) != "response") Bad("unexpected record in response file");
    eval::ResponseRecord rec;
    rec.task_id = Get<std::string>(j, "task_id");
    rec.item_id = Get<std::string>(j, "item_id");
    rec.trial = Get<int>(j, "trial");
    rec.seed = Get<std::uint64_t>(j, "seed");
    rec.text = Get<std::string>(j, "text");
    rec.error = GetOpt<std::string>(j, "error");
    r.records.push_back(std::move(rec));
  }
  return r;
}

std::string EmitSeries(const quant::MetricSeries& s) {
  json j = Record("series");
  j["kind"] = quant::MetricKindName(s.kind);
  j["task_id"] = s.task_id;
  j["risk"] = RiskTagName(s.risk);
  j["sub_dimension"] = s.sub_dimension;
  j["orientation"] = quant::OrientationName(s.orientation);
  j["values"] = s.values;
  j["partial"] = s.partial;
  return j.dump() + "\n";
}

quant::MetricSeries ParseSeries(std::string_view text) {
  const json j = Single(text);
  if (RecordKind(j) != "series") Bad("not a series record");
  quant::MetricSeries s;
  s.kind = Enum(j, "kind", quant::ParseMetricKind);
  s.task_id = Get<std::string>(j, "task_id");
  s.risk = Enum(j, "risk", ParseRiskTag);
  s.sub_dimension = Get<std::string>(j, "sub_dimension");
  s.orientation = Enum(j, "orientation", quant::ParseOrientation);
  s.values = Get<std::vector<double>>(j, "values");
  s.partial = Get<bool>(j, "partial");
  return s;
}

// ---- attribution ---------------------------------------------------------------

std::string EmitProbePairs(std::span<const model::PromptAnswerPair> pairs) {
  std::vector<json> out;
  for (const model::PromptAnswerPair& p : pairs) {
    json j = Record("");
    j["id"] = p.id;
    j["prompt"] = p.prompt;
    j["answer"] = p.answer;
    j["risk"] = RiskTagName(p.risk);
    out.push_back(std::move(j));
  }
  return Join(out);
}

std::vector<model::PromptAnswerPair> ParseProbePairs(std::string_view text) {
  std::vector<model::PromptAnswerPair> out;
  for (const json& j : Lines(text)) {
    model::PromptAnswerPair p;
    p.id = Get<std::string>(j, "id");
    p.prompt = Get<std::string>(j, "prompt");
    p.answer = Get<std::string>(j, "answer");
    p.risk = Enum(j, "risk", ParseRiskTag);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<AttributionRow> AttributionRows(
    const attribution::NeuronAttributions& a, RiskTag risk, double z_percent) {
  const std::vector<int> ranks = attribution::AbsRanks(a.values);
  const std::vector<bool> chosen = attribution::SelectTopFraction(a.values, z_percent);
  std::vector<AttributionRow> rows;
  rows.reserve(a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    rows.push_back({risk, a.pair_id, a.space.at(i), a.values[i], ranks[i], chosen[i]});
  }
  return rows;
}

std::vector<attribution::NeuronAttributions> AttributionsFromRows(
    std::span<const AttributionRow> rows, const NeuronSpace& space) {
  std::vector<attribution::NeuronAttributions> out;
  std::map<std::string, std::size_t> slot;
  std::vector<std::size_t> filled;
  for (const AttributionRow& r : rows) {
    if (!space.contains(r.neuron)) Bad("attribution row outside the neuron space");
    auto [it, fresh] = slot.emplace(r.pair_id, out.size());
    if (fresh) {
      out.push_back({r.pair_id, space, std::vector<double>(space.size(), 0.0)});
      filled.push_back(0);
    }
    out[it->second].values[space.index(r.neuron)] = r.value;
    ++filled[it->second];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (filled[i] != space.size()) {
      Bad("pair '" + out[i].pair_id + "' does not cover every neuron exactly once");
    }
  }
  return out;
}

std::string EmitAttributionRows(std::span<const AttributionRow> rows) {
  std::vector<json> out;
  out.reserve(rows.size());
  for (const AttributionRow& r : rows) {
    json j = Record("");
    j["risk"] = RiskTagName(r.risk);
    j["pair_id"] = r.pair_id;
    j["layer"] = r.neuron.layer;
    j["neuron"] = r.neuron.neuron;
    j["value"] = r.value;
    j["abs_rank"] = r.abs_rank;
    j["selected"] = r.selected;
    out.push_back(std::move(j));
  }
  return Join(out);
}

std::vector<AttributionRow> ParseAttributionRows(std::string_view text) {
  std::vector<AttributionRow> rows;
  for (const json& j : Lines(text)) {
    rows.push_back({Enum(j, "risk", ParseRiskTag), Get<std::string>(j, "pair_id"),
                    GetNeuron(j), GetNumber(j, "value"), Get<int>(j, "abs_rank"),
                    Get<bool>(j, "selected")});
  }
  return rows;
}

std::string EmitProfile(const ProfileFile& f) {
  const attribution::RiskNeuronProfile& p = f.profile;
  std::vector<json> out;
  json h = Record("profile");
  h["risk"] = RiskTagName(p.risk);
  h["n_layers"] = p.space.n_layers;
  h["d_ff"] = p.space.d_ff;
  h["probe_count"] = p.probe_count;
  h["z_percent"] = f.selection.z_percent;
  h["p_percent"] = f.selection.p_percent;
  h["selection_probe_count"] = f.selection.probe_count;
  out.push_back(std::move(h));
  for (const NeuronRef& n : p.neurons) {
    json j = Record("neuron");
    j["layer"] = n.layer;
    j["neuron"] = n.neuron;
    j["signed_summary"] = p.signed_summary.at(n);
    j["support"] = p.support.at(n);
    out.push_back(std::move(j));
  }
  return Join(out);
}

ProfileFile ParseProfile(std::string_view text) {
  const std::vector<json> lines = Lines(text);
  if (lines.empty() || RecordKind(lines.front()) != "profile") {
    Bad("profile file must start with a profile record");
  }
  const json& h = lines.front();
  ProfileFile f;
  f.profile.risk = Enum(h, "risk", ParseRiskTag);
  f.profile.space = {Get<int>(h, "n_layers"), Get<int>(h, "d_ff")};
  f.profile.probe_count = Get<int>(h, "probe_count");
  f.selection.z_percent = GetNumber(h, "z_percent");
  f.selection.p_percent = GetNumber(h, "p_percent");
  f.selection.probe_count = Get<int>(h, "selection_probe_count");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json& j = lines[i];
    if (RecordKind(j) != "neuron") Bad("unexpected record in profile");
    const NeuronRef n = GetNeuron(j);
    if (!f.profile.space.contains(n)) Bad("profile neuron outside the neuron space");
    if (!f.profile.neurons.empty() && !(f.profile.neurons.back() < n)) {
      Bad("profile neurons must be strictly ascending");
    }
    f.profile.neurons.push_back(n);
    f.profile.signed_summary[n] = GetNumber(j, "signed_summary");
    f.profile.support[n] = GetNumber(j, "support");
  }
  return f;
}

// ---- entanglement ------------------------------------------------------------

ConflictReport MakeConflictReport(const entanglement::ConflictSet& c) {
  ConflictReport r;
  r.risk_a = c.risk_a;
  r.risk_b = c.risk_b;
  for (const NeuronRef& n : c.entangled) {
    ConflictRow row;
    row.neuron = n;
    row.conflict = std::binary_search(c.conflict.begin(), c.conflict.end(), n);
    std::tie(row.summary_a, row.summary_b) = c.signs.at(n);
    r.rows.push_back(row);
  }
  return r;
}

entanglement::ConflictSet ConflictSetFromReport(const ConflictReport& r) {
  entanglement::ConflictSet c;
  c.risk_a = r.risk_a;
  c.risk_b = r.risk_b;
  for (const ConflictRow& row : r.rows) {
    c.entangled.push_back(row.neuron);
    if (row.conflict) c.conflict.push_back(row.neuron);
    c.signs[row.neuron] = {row.summary_a, row.summary_b};
  }
  return c;
}

std::string EmitConflictReport(const ConflictReport& r) {
  auto sign = [](double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
  std::vector<json> out;
  int conflicts = 0;
  for (const ConflictRow& row : r.rows) conflicts += row.conflict;
  json h = Record("conflict");
  h["risk_a"] = RiskTagName(r.risk_a);
  h["risk_b"] = RiskTagName(r.risk_b);
  h["entangled_count"] = r.rows.size();
  h["conflict_count"] = conflicts;
  out.push_back(std::move(h));
  for (const ConflictRow& row : r.rows) {
    json j = Record("neuron");
    j["layer"] = row.neuron.layer;
    j["neuron"] = row.neuron.neuron;
    j["conflict"] = row.conflict;
    j["sign_a"] = sign(row.summary_a);
    j["sign_b"] = sign(row.summary_b);
    j["summary_a"] = row.summary_a;
    j["summary_b"] = row.summary_b;
    j["delta"] = Nullable(row.delta);
    j["aligned_a"] = Nullable(row.aligned_a);
    j["aligned_b"] = Nullable(row.aligned_b);
    out.push_back(std::move(j));
  }
  json s = Record("summary");
  s["trend_a"] = r.trend_a ? TrendJson(*r.trend_a) : json(nullptr);
  s["trend_b"] = r.trend_b ? TrendJson(*r.trend_b) : json(nullptr);
  out.push_back(std::move(s));
  return Join(out);
}

ConflictReport ParseConflictReport(std::string_view text) {
  const std::vector<json> lines = Lines(text);
  if (lines.size() < 2 || RecordKind(lines.front()) != "conflict" ||
      RecordKind(lines.back()) != "summary") {
    Bad("conflict report must be a conflict record, neurons, then a summary");
  }
  ConflictReport r;
  r.risk_a = Enum(lines[0], "risk_a", ParseRiskTag);
  r.risk_b = Enum(lines[0], "risk_b", ParseRiskTag);
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    const json& j = lines[i];
    if (RecordKind(j) != "neuron") Bad("unexpected record in conflict report");
    ConflictRow row;
    row.neuron = GetNeuron(j);
    row.conflict = Get<bool>(j, "conflict");
    row.summary_a = GetNumber(j, "summary_a");
    row.summary_b = GetNumber(j, "summary_b");
    row.delta = GetOptNumber(j, "delta");
    row.aligned_a = GetOpt<bool>(j, "aligned_a");
    row.aligned_b = GetOpt<bool>(j, "aligned_b");
    r.rows.push_back(row);
  }
  if (Get<std::size_t>(lines[0], "entangled_count") != r.rows.size()) {
    Bad("entangled_count does not match the neuron records");
  }
  const json& s = lines.back();
  if (s.contains("trend_a") && !s["trend_a"].is_null()) r.trend_a = TrendFromJson(s["trend_a"]);
  if (s.contains("trend_b") && !s["trend_b"].is_null()) r.trend_b = TrendFromJson(s["trend_b"]);
  return r;
}

// ---- quantification ----------------------------------------------------------

std::string EmitQuantRows(std::span<const QuantRow> rows) {
  std::vector<json> out;
  for (const QuantRow& row : rows) {
    const quant::RiskChange& c = row.change;
    json j = Record("");
    j["model_pair"] = row.model_pair;
    j["task_id"] = c.task_id;
    j["risk_dimension"] = RiskTagName(c.risk);
    j["sub_dimension"] = c.sub_dimension;
    j["metric"] = quant::MetricKindName(c.kind);
    j["mean_before"] = c.mean_before;
    j["mean_after"] = c.mean_after;
    j["rcr_percent"] = Nullable(c.rcr_percent);
    j["direction"] = quant::DirectionName(c.direction);
    j["p_value"] = Nullable(c.p_value);
    j["significant"] = c.significant;
    j["degenerate"] = c.degenerate;
    j["exact_separation"] = c.exact_separation;
    j["verdict"] = row.verdict ? json(VerdictName(*row.verdict)) : json(nullptr);
    j["n_trend"] = Nullable(row.n_trend);
    j["note"] = row.note;
    out.push_back(std::move(j));
  }
  return Join(out);
}

std::vector<QuantRow> ParseQuantRows(std::string_view text) {
  std::vector<QuantRow> rows;
  for (const json& j : Lines(text)) {
    QuantRow row;
    quant::RiskChange& c = row.change;
    row.model_pair = Get<std::string>(j, "model_pair");
    c.task_id = Get<std::string>(j, "task_id");
    c.risk = Enum(j, "risk_dimension", ParseRiskTag);
    c.sub_dimension = Get<std::string>(j, "sub_dimension");
    c.kind = Enum(j, "metric", quant::ParseMetricKind);
    c.mean_before = GetNumber(j, "mean_before");
    c.mean_after = GetNumber(j, "mean_after");
    c.rcr_percent = GetOptNumber(j, "rcr_percent");
    c.direction = Enum(j, "direction", quant::ParseDirection);
    c.p_value = GetOptNumber(j, "p_value");
    c.significant = Get<bool>(j, "significant");
    c.degenerate = Get<bool>(j, "degenerate");
    c.exact_separation = Get<bool>(j, "exact_separation");
    if (auto v = GetOpt<std::string>(j, "verdict")) row.verdict = Enum(j, "verdict", ParseVerdict);
    row.n_trend = GetOptNumber(j, "n_trend");
    row.note = Get<std::string>(j, "note");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string QuantRowsCsv(std::span<const QuantRow> rows) {
  std::string out =
      "model_pair,task_id,risk_dimension,sub_dimension,metric,mean_before,"
      "mean_after,rcr,direction,p_value,significant,verdict,n_trend\n";
  for (const QuantRow& row : rows) {
    const quant::RiskChange& c = row.change;
    std::vector<std::string> f = {
        row.model_pair,
        c.task_id,
        std::string(RiskTagName(c.risk)),
        c.sub_dimension,
        std::string(quant::MetricKindName(c.kind)),
        Fixed(c.mean_before, 4),
        Fixed(c.mean_after, 4),
        c.rcr_percent ? Fixed(*c.rcr_percent, 2) + "%" : "degenerate",
        std::string(quant::DirectionName(c.direction)),
        c.p_value ? General(*c.p_value) : "",
        c.significant ? "significant" : "not-significant",
        row.verdict ? std::string(VerdictName(*row.verdict)) : "",
        row.n_trend ? Fixed(*row.n_trend, 4) : "",
    };
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i > 0) out += ',';
      out += CsvField(f[i]);
    }
    out += '\n';
  }
  return out;
}

std::string EmitRadar(const RadarSummary& r) {
  json j = Record("radar");
  j["model_pair"] = r.model_pair;
  json dims = json::array();
  for (const quant::RadarEntry& e : r.entries) {
    json d;
    d["sub_dimension"] = e.sub_dimension;
    d["no_data"] = e.no_data;
    d["value"] = e.no_data ? json("no-data") : json(e.signed_value());
    d["magnitude"] = e.magnitude;
    d["direction"] = quant::DirectionName(e.direction);
    d["direction_tie"] = e.direction_tie;
    d["used"] = e.used;
    dims.push_back(std::move(d));
  }
  j["sub_dimensions"] = std::move(dims);
  return j.dump() + "\n";
}

RadarSummary ParseRadar(std::string_view text) {
  const json j = Single(text);
  if (RecordKind(j) != "radar") Bad("not a radar record");
  RadarSummary r;
  r.model_pair = Get<std::string>(j, "model_pair");
  const json dims = Get<json>(j, "sub_dimensions");
  if (!dims.is_array()) Bad("sub_dimensions must be an array");
  for (const json& d : dims) {
    quant::RadarEntry e;
    e.sub_dimension = Get<std::string>(d, "sub_dimension");
    e.no_data = Get<bool>(d, "no_data");
    e.magnitude = GetNumber(d, "magnitude");
    e.direction = Enum(d, "direction", quant::ParseDirection);
    e.direction_tie = Get<bool>(d, "direction_tie");
    e.used = Get<int>(d, "used");
    r.entries.push_back(std::move(e));
  }
  return r;
}

std::string_view VerdictMark(Verdict v) {
  switch (v) {
    case Verdict::kConsistent: return "✓";
    case Verdict::kInconsistent: return "✗";
    case Verdict::kUncertain: return "◯";
  }
  return "?";
}

}  // namespace crossrisk::io
