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

// Model backends: the abstract contract consumed by attribution, evaluation
// and trend analysis, plus a small deterministic decoder-only transformer
// that implements it in-process.
//
// The toy transformer is embedding + learned positions, pre-norm blocks with
// single-head causal attention and a GELU FFN, a final layer norm and an
// output head tied to the token embedding. Logits are clamped to [-30, 30].
//
// A "neuron" is one post-GELU FFN intermediate unit. For a prompt/answer pair
// the model consumes [BOS] + prompt + answer[0..n-2]; the n positions whose
// outputs predict the answer tokens are the "answer positions". Captured
// activations are means over those positions, and pinning a neuron replaces
// its activation with one shared value at every answer position.

#ifndef CROSSRISK_MODEL_HPP_
#define CROSSRISK_MODEL_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossrisk/common.hpp"

namespace crossrisk::model {

inline constexpr int kMaxLayers = 256;
inline constexpr int kMaxModelWidth = 4096;
inline constexpr int kMaxFfnWidth = 65536;
inline constexpr int kMaxVocab = 1 << 20;
inline constexpr int kMaxContext = 4096;
inline constexpr int kDefaultMaxNewTokens = 512;
inline constexpr double kLogitClamp = 30.0;

struct ModelSpec {
  int n_layers = 2;
  int d_model = 16;
  int d_ff = 16;
  int vocab_size = 64;
  int max_context = 64;
  std::uint64_t seed = 0;
  // Standard deviation of the normal initializer for matrices and
  // embeddings. Layer-norm gains start at 1, all biases at 0.
  double init_std = 0.02;

  NeuronSpace neuron_space() const { return {n_layers, d_ff}; }
};

// Throws Error(kInvalidArgument) for non-positive counts and
// Error(kOutOfRange) for sizes beyond the compiled caps.
void ValidateSpec(const ModelSpec& spec);

// Row-major weights. A matrix named w_xy with shape (rows, cols) maps a
// cols-vector to a rows-vector. w_out is stored one row per FFN neuron, so
// row k is neuron k's outgoing projection into the residual stream.
struct LayerParameters {
  std::vector<double> ln1_gain, ln1_bias;             // d_model
  std::vector<double> wq, wk, wv, wo;                 // d_model x d_model
  std::vector<double> ln2_gain, ln2_bias;             // d_model
  std::vector<double> w_in;                           // d_ff x d_model
  std::vector<double> b_in;                           // d_ff
  std::vector<double> w_out;                          // d_ff x d_model
  std::vector<double> b_out;                          // d_model
};

struct ModelParameters {
  std::vector<double> token_embedding;     // vocab_size x d_model
  std::vector<double> position_embedding;  // max_context x d_model
  std::vector<LayerParameters> layers;
  std::vector<double> final_gain, final_bias;  // d_model
};

// Parameters drawn from a counter-based generator keyed by spec.seed; every
// value depends only on (seed, tensor, index), never on draw order.
ModelParameters InitializeParameters(const ModelSpec& spec);

// FNV-1a over the bit patterns of every parameter, in declaration order.
std::uint64_t ParameterChecksum(const ModelParameters& params);

// Whitespace word tokenizer. Ids 0..2 are <bos>, <eos>, <unk>; ids 3.. take
// the supplied words in order and the remainder are named "w<id>". Input is
// lower-cased; words outside the vocabulary hash onto the non-special ids.
class Tokenizer {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kUnk = 2;

  explicit Tokenizer(int vocab_size, std::vector<std::string> words = {});

  std::vector<int> Encode(std::string_view text) const;
  std::string Decode(std::span<const int> ids) const;
  const std::string& Word(int id) const;
  int vocab_size() const { return static_cast<int>(words_.size()); }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int, std::less<>> ids_;
};

struct TokenPair {
  std::vector<int> prompt;
  std::vector<int> answer;
};

struct PromptAnswerPair {
  std::string id;
  std::string prompt;
  std::string answer;
  RiskTag risk = RiskTag::kSafety;
};

struct ActivationSnapshot {
  std::string pair_id;
  NeuronSpace space;
  std::vector<double> values;  // flat, NeuronSpace::index order

  double at(const NeuronRef& ref) const { return values.at(space.index(ref)); }
};

struct GenerationConfig {
  double temperature = 0.0;
  int max_new_tokens = kDefaultMaxNewTokens;
  std::uint64_t trial_seed = 0;
};

// Neuron activations pinned to fixed values at every answer position.
using ActivationOverrides = std::map<NeuronRef, double>;

struct BackendMeta {
  int n_layers = 0;
  int d_ff = 0;
  double default_temperature = 1.0;

  NeuronSpace space() const { return {n_layers, d_ff}; }
};

// The contract every analysis stage runs against. Implementations must be
// safe to call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendMeta Meta() const = 0;
  virtual std::string Generate(std::string_view prompt,
                               const GenerationConfig& config) const = 0;
  // log P(answer | prompt), teacher forced.
  virtual double AnswerLogProb(const PromptAnswerPair& pair) const = 0;
  virtual ActivationSnapshot CaptureActivations(
      const PromptAnswerPair& pair) const = 0;
  // dP/dw for the neuron's activation w pinned to alpha * w_bar, where w_bar
  // is the neuron's captured activation for this pair.
  virtual double ActivationGradient(const PromptAnswerPair& pair,
                                    const NeuronRef& neuron,
                                    double alpha) const = 0;

  // The same gradient at several scales. Backends that can share the
  // activation capture across scales override this.
  virtual std::vector<double> ActivationGradientPath(
      const PromptAnswerPair& pair, const NeuronRef& neuron,
      std::span<const double> alphas) const;

  double AnswerProbability(const PromptAnswerPair& pair) const;
};

class ToyModel {
 public:
  ToyModel(ModelSpec spec, ModelParameters params, Tokenizer tokenizer);

  const ModelSpec& spec() const { return spec_; }
  const ModelParameters& parameters() const { return params_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  NeuronSpace neuron_space() const { return spec_.neuron_space(); }
  std::uint64_t checksum() const { return ParameterChecksum(params_); }

  double AnswerLogProb(const TokenPair& pair,
                       const ActivationOverrides* overrides = nullptr) const;
  double AnswerProbability(const TokenPair& pair,
                           const ActivationOverrides* overrides = nullptr) const;
  ActivationSnapshot CaptureActivations(const TokenPair& pair) const;

  // dP/dw with the neuron pinned to `value`; computed as P * dlogP/dw using
  // forward-mode differentiation through the same forward pass.
  double PinnedGradient(const TokenPair& pair, const NeuronRef& neuron,
                        double value) const;
  double ActivationGradient(const TokenPair& pair, const NeuronRef& neuron,
                            double alpha) const;
  std::vector<double> ActivationGradientPath(
      const TokenPair& pair, const NeuronRef& neuron,
      std::span<const double> alphas) const;

  // Never exceeds max_new_tokens and stops at <eos> or a full context.
  std::vector<int> GenerateTokens(std::span<const int> prompt,
                                  const GenerationConfig& config) const;

  TokenPair Tokenize(const PromptAnswerPair& pair) const;

 private:
  void CheckPair(const TokenPair& pair) const;

  ModelSpec spec_;
  ModelParameters params_;
  Tokenizer tokenizer_;
};

std::shared_ptr<const ToyModel> BuildToyModel(const ModelSpec& spec);

class ToyBackend : public Backend {
 public:
  explicit ToyBackend(std::shared_ptr<const ToyModel> model,
                      double default_temperature = 1.0);

  BackendMeta Meta() const override;
  std::string Generate(std::string_view prompt,
                       const GenerationConfig& config) const override;
  double AnswerLogProb(const PromptAnswerPair& pair) const override;
  ActivationSnapshot CaptureActivations(
      const PromptAnswerPair& pair) const override;
  double ActivationGradient(const PromptAnswerPair& pair,
                            const NeuronRef& neuron,
                            double alpha) const override;
  std::vector<double> ActivationGradientPath(
      const PromptAnswerPair& pair, const NeuronRef& neuron,
      std::span<const double> alphas) const override;

  const ToyModel& model() const { return *model_; }

 private:
  std::shared_ptr<const ToyModel> model_;
  double default_temperature_;
};

}  // namespace crossrisk::model

#endif  // CROSSRISK_MODEL_HPP_
