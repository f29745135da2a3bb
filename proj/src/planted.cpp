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

#include "crossrisk/planted.hpp"

#include <algorithm>

namespace crossrisk::model {
namespace {

constexpr double kTargetEmbedding = 1.5;  // |E[leak]| along e0
constexpr double kPositionBias = 2.0;     // constant e2 per position
constexpr double kPlantedBias = 3.0;      // pre-activation of the planted unit
constexpr double kPlantedWrite = 1.0;     // planted outgoing gain on e0 - e1
constexpr double kRelayRead = 0.5;        // relay input gain on e0 - e1
constexpr double kRelayWrite = 0.5;       // relay outgoing gain on e0 - e1

}  // namespace

ModelSpec PlantedSpec(std::uint64_t seed) {
  ModelSpec spec;
  spec.n_layers = 2;
  spec.d_model = 16;
  spec.d_ff = 64;
  spec.vocab_size = 48;
  spec.max_context = 32;
  spec.seed = seed;
  return spec;
}

std::vector<std::string> PlantedVocabulary() {
  return {kLeakWord, kInsultWord, "what",   "is",       "the",     "email",
          "of",      "alice",     "tell",   "me",       "about",   "her",
          "contact", "address",   "please", "you",      "are",     "a",
          "write",   "reply",     "to",     "this",     "message", "say",
          "something", "people",  "think",  "my",       "neighbor", "colleague",
          "why",     "how",       "do",     "i",        "find",    "share",
          "info",    "private",   "rude",   "insult",   "describe", "friend"};
}

std::shared_ptr<const ToyModel> BuildPlantedModel(std::uint64_t seed,
                                                  double outgoing_scale) {
  const ModelSpec spec = PlantedSpec(seed);
  const Tokenizer tokenizer(spec.vocab_size, PlantedVocabulary());
  ModelParameters p = InitializeParameters(spec);
  const int d = spec.d_model;

  const int leak = tokenizer.Encode(kLeakWord).front();
  const int insult = tokenizer.Encode(kInsultWord).front();
  // Keep the reserved dimensions free of random mass.
  for (int v = 0; v < spec.vocab_size; ++v) {
    for (int i = 0; i < 3; ++i) p.token_embedding[v * d + i] = 0.0;
  }
  std::fill_n(p.token_embedding.begin() + leak * d, d, 0.0);
  std::fill_n(p.token_embedding.begin() + insult * d, d, 0.0);
  p.token_embedding[leak * d + 0] = kTargetEmbedding;
  p.token_embedding[insult * d + 2] = kTargetEmbedding;
  p.token_embedding[insult * d + 0] = -kTargetEmbedding;
  for (int t = 0; t < spec.max_context; ++t) {
    for (int i = 0; i < 3; ++i) p.position_embedding[t * d + i] = 0.0;
    p.position_embedding[t * d + 2] = kPositionBias;
  }

  auto wire_outgoing = [&](LayerParameters& layer, int neuron, double gain) {
    double* row = layer.w_out.data() + neuron * d;
    std::fill_n(row, d, 0.0);
    row[0] = gain;
    row[1] = -gain;
  };

  LayerParameters& first = p.layers[kPlantedNeuron.layer];
  std::fill_n(first.w_in.begin() + kPlantedNeuron.neuron * d, d, 0.0);
  first.b_in[kPlantedNeuron.neuron] = kPlantedBias;
  wire_outgoing(first, kPlantedNeuron.neuron, kPlantedWrite * outgoing_scale);

  LayerParameters& second = p.layers[kRelayNeuron.layer];
  double* relay_in = second.w_in.data() + kRelayNeuron.neuron * d;
  std::fill_n(relay_in, d, 0.0);
  relay_in[0] = kRelayRead;
  relay_in[1] = -kRelayRead;
  wire_outgoing(second, kRelayNeuron.neuron, kRelayWrite);

  return std::make_shared<const ToyModel>(spec, std::move(p), tokenizer);
}

}  // namespace crossrisk::model
