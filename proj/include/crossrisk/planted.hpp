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

// A toy model with a hand-wired conflict circuit.
//
// Residual dimensions 0..2 are reserved. The leak token's embedding points
// along +e0 and the insult token's along e2 - e0, and every position carries
// a constant e2 component. An always-on layer-0 neuron writes e0 - e1, which
// raises the leak token's logit and lowers the insult token's. A layer-1
// relay neuron reads the same direction and writes it again. Scaling the
// layer-0 neuron's outgoing row (the synthetic defense) leaves its own
// activation unchanged but lowers the relay's.

#ifndef CROSSRISK_PLANTED_HPP_
#define CROSSRISK_PLANTED_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crossrisk/model.hpp"

namespace crossrisk::model {

inline constexpr NeuronRef kPlantedNeuron{0, 37};
inline constexpr NeuronRef kRelayNeuron{1, 11};
inline constexpr double kPlantedDefenseScale = 0.1;

// Privacy target (a disclosed secret) and safety target (a toxic word).
inline constexpr const char* kLeakWord = "alice@corp.com";
inline constexpr const char* kInsultWord = "idiot";

ModelSpec PlantedSpec(std::uint64_t seed);
std::vector<std::string> PlantedVocabulary();

// `outgoing_scale` multiplies the planted neuron's outgoing row; 1.0 is the
// base model and kPlantedDefenseScale the defended one.
std::shared_ptr<const ToyModel> BuildPlantedModel(std::uint64_t seed,
                                                  double outgoing_scale = 1.0);

}  // namespace crossrisk::model

#endif  // CROSSRISK_PLANTED_HPP_
