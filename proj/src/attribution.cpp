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

#include "crossrisk/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crossrisk/parallel.hpp"

namespace crossrisk::attribution {

bool RiskNeuronProfile::contains(const NeuronRef& ref) const {
  return std::binary_search(neurons.begin(), neurons.end(), ref);
}

AttributionScore IntegratedAttribution(const model::Backend& backend,
                                       const model::PromptAnswerPair& pair,
                                       const NeuronRef& neuron,
                                       const IGConfig& config) {
  if (config.steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "IG steps must be >= 1");
  }
  const double w_bar = backend.CaptureActivations(pair).at(neuron);
  std::vector<double> alphas(config.steps);
  for (int j = 1; j <= config.steps; ++j) {
    alphas[j - 1] = static_cast<double>(j) / config.steps;
  }
  const std::vector<double> grads =
      backend.ActivationGradientPath(pair, neuron, alphas);
  if (grads.size() != alphas.size()) {
    throw Error(ErrorCode::kBackend, "backend returned " +
                                         std::to_string(grads.size()) +
                                         " gradients for " +
                                         std::to_string(alphas.size()) + " steps");
  }
  double sum = 0.0;
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw Error(ErrorCode::kNonFinite,
                  "non-finite gradient for neuron " + ToString(neuron));
    }
    sum += g;
  }
  const double value = w_bar / config.steps * sum;
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFinite, "non-finite attribution");
  }
  return {neuron, value};
}

NeuronAttributions AttributeAll(const model::Backend& backend,
                                const model::PromptAnswerPair& pair,
                                const IGConfig& config, int workers) {
  NeuronAttributions out;
  out.pair_id = pair.id;
  out.space = backend.Meta().space();
  out.values.assign(out.space.size(), 0.0);
  ParallelFor(out.values.size(), workers, [&](std::size_t i) {
    out.values[i] =
        IntegratedAttribution(backend, pair, out.space.at(i), config).value;
  });
  return out;
}

std::vector<bool> SelectTopFraction(std::span<const double> values,
                                    double z_percent) {
  std::vector<bool> selected(values.size(), false);
  if (values.empty()) return selected;
  const double exact = z_percent * static_cast<double>(values.size()) / 100.0;
  std::size_t keep = static_cast<std::size_t>(std::ceil(exact));
  keep = std::clamp<std::size_t>(keep, 1, values.size());
  std::vector<double> mags(values.size());
  std::transform(values.begin(), values.end(), mags.begin(),
                 [](double v) { return std::abs(v); });
  std::vector<double> sorted = mags;
  std::nth_element(sorted.begin(), sorted.begin() + (keep - 1), sorted.end(),
                   std::greater<>());
  const double cutoff = sorted[keep - 1];
  for (std::size_t i = 0; i < values.size(); ++i) selected[i] = mags[i] >= cutoff;
  return selected;
}

std::vector<int> AbsRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  std::vector<int> ranks(values.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const bool tie = pos > 0 && std::abs(values[order[pos]]) ==
                                    std::abs(values[order[pos - 1]]);
    ranks[order[pos]] = tie ? ranks[order[pos - 1]] : static_cast<int>(pos) + 1;
  }
  return ranks;
}

void ValidateSelectionConfig(const SelectionConfig& config) {
  if (!(config.z_percent > 0.0 && config.z_percent <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "z_percent must lie in (0, 100]");
  }
  if (!(config.p_percent > 0.0 && config.p_percent <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "p_percent must lie in (0, 100]");
  }
}

RiskNeuronProfile SelectRiskNeurons(
    std::span<const NeuronAttributions> per_prompt,
    const SelectionConfig& config, RiskTag risk) {
  ValidateSelectionConfig(config);
  if (per_prompt.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no per-prompt attributions");
  }
  const NeuronSpace space = per_prompt.front().space;
  for (const NeuronAttributions& a : per_prompt) {
    if (a.values.empty() || a.space.size() == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "empty attribution map for pair '" + a.pair_id + "'");
    }
    if (!(a.space == space) || a.values.size() != space.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "inconsistent neuron space for pair '" + a.pair_id + "'");
    }
    for (double v : a.values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFinite,
                    "non-finite attribution for pair '" + a.pair_id + "'");
      }
    }
  }

  const std::size_t n = space.size();
  std::vector<int> count(n, 0);
  std::vector<double> signed_sum(n, 0.0);
  for (const NeuronAttributions& a : per_prompt) {
    const std::vector<bool> chosen = SelectTopFraction(a.values, config.z_percent);
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) {
        ++count[i];
        signed_sum[i] += a.values[i];
      }
    }
  }

  RiskNeuronProfile profile;
  profile.risk = risk;
  profile.space = space;
  profile.probe_count = static_cast<int>(per_prompt.size());
  const double prompts = static_cast<double>(per_prompt.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0) continue;
    // count / prompts >= p / 100, kept in integers-times-100 form.
    if (100.0 * count[i] < config.p_percent * prompts) continue;
    const double mean = signed_sum[i] / count[i];
    if (mean == 0.0) continue;
    const NeuronRef ref = space.at(i);
    profile.neurons.push_back(ref);
    profile.signed_summary[ref] = mean;
    profile.support[ref] = count[i] / prompts;
  }
  return profile;
}

}  // namespace crossrisk::attribution
