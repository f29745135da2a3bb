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

#include "crossrisk/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

namespace crossrisk::entanglement {
namespace {

int Sign(double v) { return (v > 0.0) - (v < 0.0); }

std::vector<NeuronRef> Sorted(std::vector<NeuronRef> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<NeuronRef> EntangledNeurons(const RiskNeuronProfile& a,
                                        const RiskNeuronProfile& b) {
  if (!(a.space == b.space)) {
    throw Error(ErrorCode::kInvalidArgument,
                "profiles cover different model geometries");
  }
  const std::vector<NeuronRef> lhs = Sorted(a.neurons);
  const std::vector<NeuronRef> rhs = Sorted(b.neurons);
  std::vector<NeuronRef> out;
  std::set_intersection(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                        std::back_inserter(out));
  return out;
}

ConflictSet ConflictEntangled(const RiskNeuronProfile& a,
                              const RiskNeuronProfile& b) {
  ConflictSet out;
  out.risk_a = a.risk;
  out.risk_b = b.risk;
  out.entangled = EntangledNeurons(a, b);
  for (const NeuronRef& ref : out.entangled) {
    const auto ia = a.signed_summary.find(ref);
    const auto ib = b.signed_summary.find(ref);
    if (ia == a.signed_summary.end() || ib == b.signed_summary.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "missing signed attribution for entangled neuron " +
                      ToString(ref));
    }
    out.signs[ref] = {ia->second, ib->second};
    if (ia->second * ib->second < 0.0) out.conflict.push_back(ref);
  }
  return out;
}

std::vector<ActivationDelta> ActivationDeltas(
    std::span<const model::ActivationSnapshot> base,
    std::span<const model::ActivationSnapshot> defense,
    const ConflictSet& conflict) {
  if (base.size() != defense.size() || base.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "probe set mismatch: " + std::to_string(base.size()) +
                    " base vs " + std::to_string(defense.size()) +
                    " defense snapshots");
  }
  const NeuronSpace space = base.front().space;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].pair_id != defense[i].pair_id) {
      throw Error(ErrorCode::kInvalidArgument,
                  "probe set mismatch at index " + std::to_string(i) + ": '" +
                      base[i].pair_id + "' vs '" + defense[i].pair_id + "'");
    }
    if (!(base[i].space == space) || !(defense[i].space == space)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "snapshot geometry mismatch for pair '" + base[i].pair_id + "'");
    }
  }
  const double n = static_cast<double>(base.size());
  std::vector<ActivationDelta> out;
  out.reserve(conflict.conflict.size());
  for (const NeuronRef& ref : conflict.conflict) {
    if (!space.contains(ref)) {
      throw Error(ErrorCode::kOutOfRange,
                  "conflict neuron " + ToString(ref) + " outside snapshots");
    }
    double sum_base = 0.0;
    double sum_defense = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      sum_base += base[i].at(ref);
      sum_defense += defense[i].at(ref);
    }
    const double delta = sum_defense / n - sum_base / n;
    if (!std::isfinite(delta)) {
      throw Error(ErrorCode::kNonFinite, "non-finite activation delta");
    }
    out.push_back({ref, delta});
  }
  return out;
}

TrendReport NTrend(std::span<const ActivationDelta> deltas,
                   const RiskNeuronProfile& target_profile,
                   const ConflictSet& conflict) {
  if (target_profile.risk != conflict.risk_a &&
      target_profile.risk != conflict.risk_b) {
    throw Error(ErrorCode::kInvalidArgument,
                "target risk is not part of the conflict pair");
  }
  if (conflict.conflict.empty()) {
    throw Error(ErrorCode::kNoConflictNeurons,
                "no conflict-entangled neurons for this risk pair");
  }
  std::map<NeuronRef, double> by_neuron;
  for (const ActivationDelta& d : deltas) by_neuron[d.neuron] = d.delta;

  TrendReport report;
  report.target_risk = target_profile.risk;
  for (const NeuronRef& ref : conflict.conflict) {
    const auto delta = by_neuron.find(ref);
    if (delta == by_neuron.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no activation delta for conflict neuron " + ToString(ref));
    }
    const auto attr = target_profile.signed_summary.find(ref);
    if (attr == target_profile.signed_summary.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "target profile lacks conflict neuron " + ToString(ref));
    }
    const int ds = Sign(delta->second);
    if (ds != 0 && ds == Sign(attr->second)) ++report.aligned_count;
    if (ds != 0) ++report.moved_count;
    ++report.total_count;
  }
  report.n_trend =
      static_cast<double>(report.aligned_count) / report.total_count;
  return report;
}

}  // namespace crossrisk::entanglement
