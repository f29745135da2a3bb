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

// Closed-form backend: every neuron i has a fixed activation w_i and the
// answer probability is a scalar function P(w) of that neuron alone.

#ifndef CROSSRISK_TESTS_SURROGATE_BACKEND_HPP_
#define CROSSRISK_TESTS_SURROGATE_BACKEND_HPP_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "crossrisk/model.hpp"

namespace crossrisk::testing {

class SurrogateBackend : public model::Backend {
 public:
  // derivative(w) is dP/dw.
  SurrogateBackend(std::vector<double> activations,
                   std::function<double(double)> derivative)
      : activations_(std::move(activations)), derivative_(std::move(derivative)) {}

  model::BackendMeta Meta() const override {
    return {1, static_cast<int>(activations_.size()), 1.0};
  }
  std::string Generate(std::string_view, const model::GenerationConfig&) const override {
    return "";
  }
  double AnswerLogProb(const model::PromptAnswerPair&) const override { return 0.0; }
  model::ActivationSnapshot CaptureActivations(
      const model::PromptAnswerPair& pair) const override {
    return {pair.id, Meta().space(), activations_};
  }
  double ActivationGradient(const model::PromptAnswerPair&, const NeuronRef& ref,
                            double alpha) const override {
    return derivative_(alpha * activations_.at(ref.neuron));
  }

 private:
  std::vector<double> activations_;
  std::function<double(double)> derivative_;
};

}  // namespace crossrisk::testing

#endif  // CROSSRISK_TESTS_SURROGATE_BACKEND_HPP_
