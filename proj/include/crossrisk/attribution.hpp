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

// Integrated-gradient attribution of FFN neurons and risk-specific neuron
// selection.
//
// For a neuron with captured activation w_bar the attribution is the
// right-endpoint Riemann sum of dP/dw along the straight path from a zero
// activation to w_bar:
//
//   Att = (w_bar / m) * sum_{j=1..m} dP(Y | X, (j/m) w_bar) / dw
//
// A risk profile keeps, per probe prompt, the top z% of neurons by |Att|
// (everything tying the cutoff magnitude included) and then retains neurons
// selected on at least p% of the prompts.

#ifndef CROSSRISK_ATTRIBUTION_HPP_
#define CROSSRISK_ATTRIBUTION_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "crossrisk/common.hpp"
#include "crossrisk/model.hpp"

namespace crossrisk::attribution {

struct IGConfig {
  int steps = 20;  // m; the baseline is always the zero activation
};

struct AttributionScore {
  NeuronRef neuron;
  double value = 0.0;
};

// Signed attributions for every neuron of one prompt/answer pair.
struct NeuronAttributions {
  std::string pair_id;
  NeuronSpace space;
  std::vector<double> values;  // NeuronSpace::index order

  double at(const NeuronRef& ref) const { return values.at(space.index(ref)); }

  friend bool operator==(const NeuronAttributions&, const NeuronAttributions&) = default;
};

struct SelectionConfig {
  double z_percent = 1.0;
  double p_percent = 60.0;
  int probe_count = 100;

  friend bool operator==(const SelectionConfig&, const SelectionConfig&) = default;
};

struct RiskNeuronProfile {
  RiskTag risk = RiskTag::kSafety;
  NeuronSpace space;
  int probe_count = 0;
  std::vector<NeuronRef> neurons;  // ascending
  std::map<NeuronRef, double> signed_summary;
  std::map<NeuronRef, double> support;

  bool contains(const NeuronRef& ref) const;

  friend bool operator==(const RiskNeuronProfile&, const RiskNeuronProfile&) = default;
};

AttributionScore IntegratedAttribution(const model::Backend& backend,
                                       const model::PromptAnswerPair& pair,
                                       const NeuronRef& neuron,
                                       const IGConfig& config);

// Every neuron of the backend's geometry, evaluated on up to `workers`
// threads. Output is independent of the schedule.
NeuronAttributions AttributeAll(const model::Backend& backend,
                                const model::PromptAnswerPair& pair,
                                const IGConfig& config, int workers = 1);

// Per-prompt top-z% selection: ceil(z% of the neuron count) by magnitude,
// widened to every neuron tying the cutoff magnitude.
std::vector<bool> SelectTopFraction(std::span<const double> values,
                                    double z_percent);

// 1-based rank by descending |value|; ties share the smallest rank.
std::vector<int> AbsRanks(std::span<const double> values);

RiskNeuronProfile SelectRiskNeurons(
    std::span<const NeuronAttributions> per_prompt,
    const SelectionConfig& config, RiskTag risk);

void ValidateSelectionConfig(const SelectionConfig& config);

}  // namespace crossrisk::attribution

#endif  // CROSSRISK_ATTRIBUTION_HPP_
