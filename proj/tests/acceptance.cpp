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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every criterion also has a wall-clock budget.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "crossrisk/attribution.hpp"
#include "crossrisk/entanglement.hpp"
#include "crossrisk/eval.hpp"
#include "crossrisk/io.hpp"
#include "crossrisk/pipeline.hpp"
#include "crossrisk/planted.hpp"
#include "crossrisk/quant.hpp"
#include "support/surrogate_backend.hpp"
#include "support/welch_oracle.hpp"

namespace {

namespace fs = std::filesystem;
using namespace crossrisk;

const fs::path kData = CROSSRISK_DATA_DIR;

// Collects failure messages for one criterion.
class Check {
 public:
  void That(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string Summary() const {
    std::string s;
    for (const std::string& f : failures_) s += (s.empty() ? "" : "; ") + f;
    if (count_ > static_cast<int>(failures_.size())) {
      s += "; +" + std::to_string(count_ - failures_.size()) + " more";
    }
    return s;
  }

 private:
  std::vector<std::string> failures_;
  int count_ = 0;
};

std::string Num(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

// ---------------------------------------------------------------------------

void IgQuadrature(Check& c) {
  const model::PromptAnswerPair pair{"p", "q", "a", RiskTag::kSafety};
  testing::SurrogateBackend quadratic({0.9, -1.7, 0.05},
                                      [](double w) { return 2.0 * w; });
  for (int i = 0; i < 3; ++i) {
    const double w = quadratic.CaptureActivations(pair).values[i];
    const double att = attribution::IntegratedAttribution(quadratic, pair, {0, i}, {20}).value;
    const double want = 1.05 * w * w;
    c.That(std::abs(att - want) <= 1e-12 * std::abs(want),
           "w^2 surrogate: " + Num(att) + " vs " + Num(want));
  }
  const double beta = -0.61;
  testing::SurrogateBackend linear({0.9, -1.7, 0.05}, [&](double) { return beta; });
  for (int m : {1, 5, 20}) {
    for (int i = 0; i < 3; ++i) {
      const double w = linear.CaptureActivations(pair).values[i];
      const double att = attribution::IntegratedAttribution(linear, pair, {0, i}, {m}).value;
      c.That(std::abs(att - beta * w) <= 1e-15 * std::max(1.0, std::abs(beta * w)),
             "linear surrogate m=" + std::to_string(m));
    }
  }
}

model::TokenPair RandomPair(std::mt19937_64& rng, int vocab) {
  model::TokenPair pair;
  const int np = 1 + static_cast<int>(rng() % 6);
  const int na = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < np; ++i) pair.prompt.push_back(3 + static_cast<int>(rng() % (vocab - 3)));
  for (int i = 0; i < na; ++i) pair.answer.push_back(3 + static_cast<int>(rng() % (vocab - 3)));
  return pair;
}

void IgConvergence(Check& c) {
  model::ModelSpec spec;
  spec.n_layers = 2;
  spec.d_ff = 16;
  spec.seed = 2026;
  model::ToyBackend backend(model::BuildToyModel(spec));
  const model::Tokenizer& tok = backend.model().tokenizer();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const model::TokenPair tp = RandomPair(rng, spec.vocab_size);
    const model::PromptAnswerPair pair{"f" + std::to_string(k), tok.Decode(tp.prompt),
                                       tok.Decode(tp.answer), RiskTag::kSafety};
    const NeuronRef ref{static_cast<int>(rng() % 2), static_cast<int>(rng() % 16)};
    const double coarse = attribution::IntegratedAttribution(backend, pair, ref, {20}).value;
    const double fine = attribution::IntegratedAttribution(backend, pair, ref, {2000}).value;
    const double rel = std::abs(coarse - fine) / std::max(std::abs(fine), 1e-6);
    c.That(rel <= 0.01, "fixture " + std::to_string(k) + " relative error " + Num(rel));
  }
}

void GradientOracle(Check& c) {
  model::ModelSpec spec;
  spec.n_layers = 2;
  spec.d_ff = 16;
  spec.seed = 99;
  spec.init_std = 0.3;
  const auto model = model::BuildToyModel(spec);
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const model::TokenPair pair = RandomPair(rng, spec.vocab_size);
    const NeuronRef ref{static_cast<int>(rng() % 2), static_cast<int>(rng() % 16)};
    const double alpha = unit(rng);
    const double w = alpha * model->CaptureActivations(pair).at(ref);
    const double h = 1e-4;
    const model::ActivationOverrides up{{ref, w + h}}, down{{ref, w - h}};
    const double fd =
        (model->AnswerProbability(pair, &up) - model->AnswerProbability(pair, &down)) / (2 * h);
    const double g = model->ActivationGradient(pair, ref, alpha);
    c.That(std::abs(g - fd) <= std::max(1e-4 * std::abs(fd), 1e-8),
           "triple " + std::to_string(k) + ": " + Num(g) + " vs " + Num(fd));
  }
}

void StatisticsOracle(Check& c) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> a(2 + rng() % 9), b(2 + rng() % 9);
    for (double& x : a) x = unit(rng);
    for (double& x : b) x = 0.8 * unit(rng) + 0.2 * unit(rng) * unit(rng);
    const auto got = quant::WelchTTest(a, b);
    const auto want = testing::ReferenceWelchTest(a, b);
    c.That(std::abs(got.t - want.t) <= 1e-10 * std::max(1.0, std::abs(want.t)),
           "t for pair " + std::to_string(k));
    c.That(std::abs(got.p_value - want.p) <= 1e-10,
           "p for pair " + std::to_string(k) + ": " + Num(got.p_value) + " vs " + Num(want.p));
  }
  const std::vector<double> same = {0.1, 0.5, 0.9, 0.3};
  c.That(quant::WelchTTest(same, same).p_value == 1.0, "identical samples p != 1");
  const std::vector<double> flat = {0.4, 0.4, 0.4};
  c.That(quant::WelchTTest(flat, flat).p_value == 1.0, "identical flat samples p != 1");

  quant::MetricSeries before;
  before.task_id = "t";
  before.orientation = quant::Orientation::kHigherIsRiskier;
  before.values = {0.5, 0.5, 0.5, 0.5, 0.5};
  quant::MetricSeries after = before;
  after.values = {0.75, 0.75, 0.75, 0.75, 0.75};
  const quant::RiskChange change = quant::Rcr(before, after);
  c.That(change.rcr_percent && *change.rcr_percent == 50.0, "RCR 50 -> 75 is not 50%");
  c.That(change.direction == quant::Direction::kIncreasedRisk, "RCR direction");
  io::QuantRow row;
  row.change = change;
  c.That(io::QuantRowsCsv(std::vector<io::QuantRow>{row}).find("50.00%") != std::string::npos,
         "RCR not rendered as 50.00%");
}

attribution::RiskNeuronProfile RandomProfile(std::mt19937_64& rng, RiskTag risk,
                                             const NeuronSpace& space) {
  std::normal_distribution<double> g;
  attribution::RiskNeuronProfile p;
  p.risk = risk;
  p.space = space;
  p.probe_count = 10;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (rng() % 3 != 0) continue;
    const NeuronRef ref = space.at(i);
    p.neurons.push_back(ref);
    p.signed_summary[ref] = rng() % 10 == 0 ? 0.0 : g(rng);
    p.support[ref] = 1.0;
  }
  return p;
}

void SetAlgebra(Check& c) {
  std::mt19937_64 rng(1000);
  std::normal_distribution<double> g;
  const NeuronSpace space{3, 12};
  for (int k = 0; k < 1000; ++k) {
    const auto a = RandomProfile(rng, RiskTag::kPrivacy, space);
    const auto b = RandomProfile(rng, RiskTag::kSafety, space);
    const auto ab = entanglement::ConflictEntangled(a, b);
    const auto ba = entanglement::ConflictEntangled(b, a);
    c.That(ab.entangled == ba.entangled && ab.conflict == ba.conflict, "symmetry");
    c.That(std::includes(ab.entangled.begin(), ab.entangled.end(), ab.conflict.begin(),
                         ab.conflict.end()),
           "conflict not within entangled");
    for (const NeuronRef& ref : ab.entangled) {
      c.That(a.contains(ref) && b.contains(ref), "entangled not within both profiles");
      const double prod = a.signed_summary.at(ref) * b.signed_summary.at(ref);
      const bool in_conflict =
          std::binary_search(ab.conflict.begin(), ab.conflict.end(), ref);
      c.That(in_conflict == (prod < 0.0), "strict-sign rule for " + ToString(ref));
    }
    if (ab.conflict.empty()) continue;
    std::vector<entanglement::ActivationDelta> deltas;
    for (const NeuronRef& ref : ab.conflict) {
      deltas.push_back({ref, rng() % 5 == 0 ? 0.0 : g(rng)});
    }
    for (const auto* target : {&a, &b}) {
      const auto r = entanglement::NTrend(deltas, *target, ab);
      c.That(r.n_trend >= 0.0 && r.n_trend <= 1.0, "N_trend outside [0, 1]");
    }
  }
  // Counting fixture: three of four conflict neurons move toward the target.
  attribution::RiskNeuronProfile a, b;
  a.risk = RiskTag::kPrivacy;
  b.risk = RiskTag::kSafety;
  a.space = b.space = {1, 4};
  std::vector<entanglement::ActivationDelta> deltas;
  for (int i = 0; i < 4; ++i) {
    a.neurons.push_back({0, i});
    b.neurons.push_back({0, i});
    a.signed_summary[{0, i}] = 1.0;
    b.signed_summary[{0, i}] = -1.0;
    deltas.push_back({{0, i}, i < 3 ? 0.5 : -0.5});
  }
  const auto set = entanglement::ConflictEntangled(a, b);
  c.That(entanglement::NTrend(deltas, a, set).n_trend == 0.75, "3/4 fixture");
}

std::vector<model::PromptAnswerPair> PlantedProbes(RiskTag risk, std::size_t n) {
  std::vector<model::PromptAnswerPair> out;
  for (const auto& p :
       io::ParseProbePairs(io::ReadFile(kData / "planted_study/probe_pairs.jsonl"))) {
    if (p.risk == risk && out.size() < n) out.push_back(p);
  }
  return out;
}

void PlantedRecovery(Check& c) {
  model::ToyBackend backend(model::BuildPlantedModel(7));
  attribution::SelectionConfig selection;  // z = 1, p = 60
  std::vector<attribution::RiskNeuronProfile> profiles;
  for (RiskTag risk : {RiskTag::kPrivacy, RiskTag::kSafety}) {
    const auto probes = PlantedProbes(risk, 20);
    c.That(probes.size() == 20, "expected 20 probe pairs per risk");
    std::vector<attribution::NeuronAttributions> per_prompt;
    for (const auto& p : probes) {
      per_prompt.push_back(attribution::AttributeAll(backend, p, {20}));
    }
    profiles.push_back(attribution::SelectRiskNeurons(per_prompt, selection, risk));
  }
  const auto set = entanglement::ConflictEntangled(profiles[0], profiles[1]);
  const bool flagged = std::binary_search(set.conflict.begin(), set.conflict.end(),
                                          model::kPlantedNeuron);
  c.That(flagged, "planted neuron " + ToString(model::kPlantedNeuron) +
                      " not conflict-entangled");
  if (flagged) {
    const auto [sa, sb] = set.signs.at(model::kPlantedNeuron);
    c.That(sa > 0.0 && sb < 0.0, "planted neuron signs " + Num(sa) + " / " + Num(sb));
  }
}

void EndToEnd(Check& c) {
  const fs::path dir = fs::temp_directory_path() / "crossrisk_acceptance_e2e";
  fs::remove_all(dir);
  const auto config = pipeline::LoadStudyConfig(kData / "planted_study/config.json");
  pipeline::RunStudy(config, *pipeline::OpenBackend(config.base_backend),
                     *pipeline::OpenBackend(config.defense_backend), dir);
  const auto rows = io::ParseQuantRows(io::ReadFile(dir / "quant.jsonl"));
  const auto verdicts = io::ParseQuantRows(io::ReadFile(dir / "verdicts.jsonl"));
  bool risk_a = false, risk_b = false, verdict_a = false;
  for (const io::QuantRow& r : rows) {
    if (r.change.risk == RiskTag::kPrivacy) {
      risk_a = r.change.significant &&
               r.change.direction == quant::Direction::kDecreasedRisk;
    }
    if (r.change.risk == RiskTag::kSafety) {
      risk_b = r.change.mean_after != r.change.mean_before;
    }
  }
  for (const io::QuantRow& v : verdicts) {
    if (v.change.risk != RiskTag::kPrivacy) continue;
    const bool outside = v.n_trend && (*v.n_trend < config.band.low || *v.n_trend > config.band.high);
    const bool aligned = v.n_trend && ((*v.n_trend > 0.5) ==
                                       (v.change.direction == quant::Direction::kIncreasedRisk));
    verdict_a = v.verdict == Verdict::kConsistent && outside && aligned;
  }
  c.That(risk_a, "risk-A metric not a significant decrease");
  c.That(risk_b, "risk-B metric unchanged");
  c.That(verdict_a, "risk-A verdict is not consistent");
  fs::remove_all(dir);
}

std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = io::ReadFile(e.path());
  }
  return out;
}

std::vector<std::string> Lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void ScorerSuite(Check& c) {
  const eval::LexiconRefusalDetector detector;
  const auto refusals = Lines(kData / "fixtures/refusals.txt");
  const auto others = Lines(kData / "fixtures/non_refusals.txt");
  c.That(refusals.size() == 60 && others.size() == 60, "fixture corpus is not 60 + 60");
  for (const auto& s : refusals) c.That(detector.IsRefusal(s), "missed refusal: " + s);
  for (const auto& s : others) c.That(!detector.IsRefusal(s), "false refusal: " + s);

  eval::TaskManifest td;
  td.task_id = "td";
  td.risk = RiskTag::kPrivacy;
  td.sub_dimension = "privacy-leakage";
  td.metric = quant::MetricKind::kTd;
  td.orientation = quant::Orientation::kHigherIsRiskier;
  eval::ResponseSet tr;
  tr.task_id = "td";
  tr.trial_count = 1;
  const char* texts[] = {"nothing", "mail Alice@Corp.com now", "no", "none"};
  for (int i = 0; i < 4; ++i) {
    eval::TaskItem item;
    item.item_id = "i" + std::to_string(i);
    item.prompt = "p";
    item.secrets = {"alice@corp.com"};
    td.items.push_back(item);
    tr.records.push_back({"td", item.item_id, 0, 0, texts[i], std::nullopt});
  }
  c.That(eval::ScoreTd(tr, td).values == std::vector<double>{0.25}, "TD 1 of 4 != 0.25");

  eval::TaskManifest acc;
  acc.task_id = "acc";
  acc.kind = eval::TaskKind::kClassification;
  acc.metric = quant::MetricKind::kAccuracy;
  eval::ResponseSet ar;
  ar.task_id = "acc";
  ar.trial_count = 1;
  const char* gold[] = {"B", "A", "C"};
  const char* answers[] = {"The answer is B.", "A", "B"};
  for (int i = 0; i < 3; ++i) {
    eval::TaskItem item;
    item.item_id = "q" + std::to_string(i);
    item.prompt = "p";
    item.gold_label = gold[i];
    acc.items.push_back(item);
    ar.records.push_back({"acc", item.item_id, 0, 0, answers[i], std::nullopt});
  }
  c.That(eval::ScoreAccuracy(ar, acc).values == std::vector<double>{2.0 / 3.0},
         "accuracy 2 of 3 != 0.667");
  c.That(!eval::IsCorrect("A", acc.items[0]), "gold B accepted response A");

  const auto config = pipeline::LoadStudyConfig(kData / "fixtures/toy_study/config.json");
  const fs::path one = fs::temp_directory_path() / "crossrisk_acceptance_rerun1";
  const fs::path two = fs::temp_directory_path() / "crossrisk_acceptance_rerun2";
  for (const fs::path& dir : {one, two}) {
    fs::remove_all(dir);
    pipeline::RunStudy(config, *pipeline::OpenBackend(config.base_backend),
                       *pipeline::OpenBackend(config.defense_backend), dir);
  }
  const auto snapshot = Snapshot(one);
  c.That(snapshot == Snapshot(two), "pipeline reruns differ");
  int series = 0;
  for (const auto& [name, text] : snapshot) {
    if (name.find("series/") == std::string::npos) continue;
    ++series;
    for (double v : io::ParseSeries(text).values) {
      c.That(v >= 0.0 && v <= 1.0, name + " holds " + Num(v));
    }
  }
  c.That(series == 6, "expected 6 series files, found " + std::to_string(series));
  fs::remove_all(one);
  fs::remove_all(two);
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"ig-quadrature", 1, IgQuadrature},
      {"ig-convergence", 120, IgConvergence},
      {"gradient-oracle", 60, GradientOracle},
      {"statistics-oracle", 5, StatisticsOracle},
      {"set-algebra-and-trend-properties", 5, SetAlgebra},
      {"planted-conflict-recovery", 300, PlantedRecovery},
      {"end-to-end-defense-study", 600, EndToEnd},
      {"scorer-suite", 120, ScorerSuite},
  };
  int failed = 0;
  for (const Criterion& crit : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.run(check);
    } catch (const std::exception& e) {
      check.That(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.That(secs <= crit.budget_seconds,
               "took " + Num(secs) + " s, budget " + Num(crit.budget_seconds) + " s");
    std::cout << (check.ok() ? "PASS " : "FAIL ") << crit.name << " (" << Num(secs) << " s)";
    if (!check.ok()) std::cout << ": " << check.Summary();
    std::cout << std::endl;
    failed += !check.ok();
  }
  return failed == 0 ? 0 : 1;
}
