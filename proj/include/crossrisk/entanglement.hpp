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

#ifndef CROSSRISK_ENTANGLEMENT_HPP_
#define CROSSRISK_ENTANGLEMENT_HPP_

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "crossrisk/attribution.hpp"
#include "crossrisk/common.hpp"
#include "crossrisk/model.hpp"

namespace crossrisk::entanglement {

using attribution::RiskNeuronProfile;

struct ConflictSet {
  RiskTag risk_a = RiskTag::kSafety;
  RiskTag risk_b = RiskTag::kSafety;
  std::vector<NeuronRef> entangled;  // ascending
  std::vector<NeuronRef> conflict;   // ascending, subset of entangled
  // Signed summaries (risk_a, risk_b) for every entangled neuron.
  std::map<NeuronRef, std::pair<double, double>> signs;

  friend bool operator==(const ConflictSet&, const ConflictSet&) = default;
};

struct ActivationDelta {
  NeuronRef neuron;
  double delta = 0.0;  // defense minus base
};

struct TrendReport {
  RiskTag target_risk = RiskTag::kSafety;
  double n_trend = 0.0;
  int aligned_count = 0;
  int total_count = 0;
  int moved_count = 0;  // conflict neurons with a nonzero delta
  std::optional<Verdict> verdict;

  friend bool operator==(const TrendReport&, const TrendReport&) = default;
};

// Intersection of the two profiles' neuron sets.
std::vector<NeuronRef> EntangledNeurons(const RiskNeuronProfile& a,
                                        const RiskNeuronProfile& b);

// Entangled neurons whose signed summaries multiply to a strictly negative
// value.
ConflictSet ConflictEntangled(const RiskNeuronProfile& a,
                              const RiskNeuronProfile& b);

// Per conflict neuron: mean activation over the defense snapshots minus mean
// over the base snapshots. Both lists must cover the same pairs in the same
// order.
std::vector<ActivationDelta> ActivationDeltas(
    std::span<const model::ActivationSnapshot> base,
    std::span<const model::ActivationSnapshot> defense,
    const ConflictSet& conflict);

// Fraction of conflict neurons whose delta sign equals the sign of their
// attribution toward target_profile's risk. A zero delta never aligns.
// Throws Error(kNoConflictNeurons) when the conflict set is empty.
TrendReport NTrend(std::span<const ActivationDelta> deltas,
                   const RiskNeuronProfile& target_profile,
                   const ConflictSet& conflict);

}  // namespace crossrisk::entanglement

#endif  // CROSSRISK_ENTANGLEMENT_HPP_
