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

#include "crossrisk/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

#include "dual.hpp"

namespace crossrisk::model {
namespace {

using internal::Dual;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Standard normal keyed by (seed, stream, index) via Box-Muller on two
// counter-hashed uniforms.
double CounterNormal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index) {
  const std::uint64_t key = SplitMix64(seed ^ SplitMix64(stream));
  const std::uint64_t a = SplitMix64(key + 2 * index);
  const std::uint64_t b = SplitMix64(key + 2 * index + 1);
  const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> NormalTensor(const ModelSpec& spec, std::uint64_t stream,
                                 std::size_t size) {
  std::vector<double> out(size);
  for (std::size_t i = 0; i < size; ++i) {
    out[i] = spec.init_std * CounterNormal(spec.seed, stream, i);
  }
  return out;
}

std::uint64_t Fnv1a(std::uint64_t hash, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (bits >> (8 * byte)) & 0xFF;
      hash *= 0x100000001B3ULL;
    }
  }
  return hash;
}

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

template <typename T>
struct Pin {
  NeuronRef ref;
  T value;
};

template <typename T>
std::vector<T> LayerNorm(const std::vector<T>& x, const std::vector<double>& gain,
                         const std::vector<double>& bias) {
  constexpr double kEps = 1e-5;
  const double n = static_cast<double>(x.size());
  T mean = 0.0;
  for (const T& v : x) mean += v;
  mean = mean / n;
  T var = 0.0;
  for (const T& v : x) {
    const T c = v - mean;
    var += c * c;
  }
  var = var / n;
  const T inv = T(1.0) / internal::Sqrt(var + kEps);
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - mean) * inv * gain[i] + bias[i];
  }
  return out;
}

template <typename T>
std::vector<T> MatVec(const std::vector<double>& w, const std::vector<T>& x,
                      int rows, int cols) {
  std::vector<T> out(static_cast<std::size_t>(rows), T(0.0));
  for (int r = 0; r < rows; ++r) {
    const double* row = w.data() + static_cast<std::size_t>(r) * cols;
    T acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += x[c] * row[c];
    out[r] = acc;
  }
  return out;
}

// Runs every block over `seq` and returns the final-normed hidden state per
// position. Pins replace post-GELU activations at positions >= answer_begin.
// When `capture` is given, post-GELU values at those positions are summed
// into it (flat NeuronSpace order).
template <typename T>
std::vector<std::vector<T>> RunBlocks(const ModelSpec& spec,
                                      const ModelParameters& p,
                                      std::span<const int> seq,
                                      std::size_t answer_begin,
                                      std::span<const Pin<T>> pins,
                                      std::vector<double>* capture) {
  const int d = spec.d_model;
  const int f = spec.d_ff;
  const std::size_t n = seq.size();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  std::vector<std::vector<T>> x(n, std::vector<T>(d));
  for (std::size_t t = 0; t < n; ++t) {
    const double* emb = p.token_embedding.data() + static_cast<std::size_t>(seq[t]) * d;
    const double* pos = p.position_embedding.data() + t * d;
    for (int i = 0; i < d; ++i) x[t][i] = emb[i] + pos[i];
  }

  for (int l = 0; l < spec.n_layers; ++l) {
    const LayerParameters& lp = p.layers[l];

    std::vector<std::vector<T>> q(n), k(n), v(n);
    for (std::size_t t = 0; t < n; ++t) {
      const std::vector<T> u = LayerNorm(x[t], lp.ln1_gain, lp.ln1_bias);
      q[t] = MatVec(lp.wq, u, d, d);
      k[t] = MatVec(lp.wk, u, d, d);
      v[t] = MatVec(lp.wv, u, d, d);
    }
    for (std::size_t t = 0; t < n; ++t) {
      std::vector<T> scores(t + 1);
      std::size_t arg_max = 0;
      for (std::size_t s = 0; s <= t; ++s) {
        T dot = 0.0;
        for (int i = 0; i < d; ++i) dot += q[t][i] * k[s][i];
        scores[s] = dot * inv_sqrt_d;
        if (internal::Value(scores[s]) > internal::Value(scores[arg_max])) {
          arg_max = s;
        }
      }
      const T shift = scores[arg_max];
      T denom = 0.0;
      for (auto& s : scores) {
        s = internal::Exp(s - shift);
        denom += s;
      }
      std::vector<T> ctx(d, T(0.0));
      for (std::size_t s = 0; s <= t; ++s) {
        const T weight = scores[s] / denom;
        for (int i = 0; i < d; ++i) ctx[i] += weight * v[s][i];
      }
      const std::vector<T> out = MatVec(lp.wo, ctx, d, d);
      for (int i = 0; i < d; ++i) x[t][i] += out[i];
    }

    for (std::size_t t = 0; t < n; ++t) {
      const std::vector<T> u = LayerNorm(x[t], lp.ln2_gain, lp.ln2_bias);
      std::vector<T> h = MatVec(lp.w_in, u, f, d);
      for (int j = 0; j < f; ++j) h[j] = internal::Gelu(h[j] + lp.b_in[j]);
      if (t >= answer_begin) {
        for (const Pin<T>& pin : pins) {
          if (pin.ref.layer == l) h[pin.ref.neuron] = pin.value;
        }
        if (capture != nullptr) {
          double* dst = capture->data() + static_cast<std::size_t>(l) * f;
          for (int j = 0; j < f; ++j) dst[j] += internal::Value(h[j]);
        }
      }
      for (int i = 0; i < d; ++i) x[t][i] += lp.b_out[i];
      for (int j = 0; j < f; ++j) {
        const double* row = lp.w_out.data() + static_cast<std::size_t>(j) * d;
        for (int i = 0; i < d; ++i) x[t][i] += h[j] * row[i];
      }
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    x[t] = LayerNorm(x[t], p.final_gain, p.final_bias);
  }
  return x;
}

template <typename T>
std::vector<T> Logits(const ModelSpec& spec, const ModelParameters& p,
                      const std::vector<T>& hidden) {
  std::vector<T> logits = MatVec(p.token_embedding, hidden, spec.vocab_size,
                                 spec.d_model);
  for (T& z : logits) z = internal::Clamp(z, kLogitClamp);
  return logits;
}

std::vector<int> BuildSequence(const TokenPair& pair) {
  std::vector<int> seq;
  seq.reserve(pair.prompt.size() + pair.answer.size());
  seq.push_back(Tokenizer::kBos);
  seq.insert(seq.end(), pair.prompt.begin(), pair.prompt.end());
  seq.insert(seq.end(), pair.answer.begin(), pair.answer.end() - 1);
  return seq;
}

template <typename T>
T AnswerLogProbT(const ModelSpec& spec, const ModelParameters& p,
                 const TokenPair& pair, std::span<const Pin<T>> pins) {
  const std::vector<int> seq = BuildSequence(pair);
  const std::size_t begin = pair.prompt.size();
  const auto hidden = RunBlocks<T>(spec, p, seq, begin, pins, nullptr);
  T total = 0.0;
  for (std::size_t i = 0; i < pair.answer.size(); ++i) {
    const std::vector<T> logits = Logits(spec, p, hidden[begin + i]);
    double max_logit = internal::Value(logits[0]);
    for (const T& z : logits) max_logit = std::max(max_logit, internal::Value(z));
    T sum = 0.0;
    for (const T& z : logits) sum += internal::Exp(z - max_logit);
    total += logits[pair.answer[i]] - max_logit - internal::Log(sum);
  }
  if (!std::isfinite(internal::Value(total))) {
    throw Error(ErrorCode::kNonFinite, "non-finite answer log-probability");
  }
  return total;
}

void CheckNeuron(const ModelSpec& spec, const NeuronRef& ref) {
  if (!spec.neuron_space().contains(ref)) {
    throw Error(ErrorCode::kOutOfRange, "neuron " + ToString(ref) +
                                            " outside model geometry");
  }
}

void CheckAlpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "path scale alpha must lie in [0, 1]");
  }
}

}  // namespace

void ValidateSpec(const ModelSpec& spec) {
  auto positive = [](int v, const char* name) {
    if (v < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(name) + " must be >= 1, got " + std::to_string(v));
    }
  };
  positive(spec.n_layers, "n_layers");
  positive(spec.d_model, "d_model");
  positive(spec.d_ff, "d_ff");
  positive(spec.vocab_size, "vocab_size");
  positive(spec.max_context, "max_context");
  auto capped = [](int v, int cap, const char* name) {
    if (v > cap) {
      throw Error(ErrorCode::kOutOfRange, std::string(name) + " " +
                                              std::to_string(v) +
                                              " exceeds cap " + std::to_string(cap));
    }
  };
  capped(spec.n_layers, kMaxLayers, "n_layers");
  capped(spec.d_model, kMaxModelWidth, "d_model");
  capped(spec.d_ff, kMaxFfnWidth, "d_ff");
  capped(spec.vocab_size, kMaxVocab, "vocab_size");
  capped(spec.max_context, kMaxContext, "max_context");
  if (!(spec.init_std >= 0.0) || !std::isfinite(spec.init_std)) {
    throw Error(ErrorCode::kInvalidArgument, "init_std must be finite and >= 0");
  }
}

ModelParameters InitializeParameters(const ModelSpec& spec) {
  ValidateSpec(spec);
  const auto d = static_cast<std::size_t>(spec.d_model);
  const auto f = static_cast<std::size_t>(spec.d_ff);
  ModelParameters p;
  p.token_embedding = NormalTensor(spec, 1, spec.vocab_size * d);
  p.position_embedding = NormalTensor(spec, 2, spec.max_context * d);
  p.layers.resize(spec.n_layers);
  for (int l = 0; l < spec.n_layers; ++l) {
    const std::uint64_t base = 100 + 16 * static_cast<std::uint64_t>(l);
    LayerParameters& lp = p.layers[l];
    lp.ln1_gain.assign(d, 1.0);
    lp.ln1_bias.assign(d, 0.0);
    lp.wq = NormalTensor(spec, base + 0, d * d);
    lp.wk = NormalTensor(spec, base + 1, d * d);
    lp.wv = NormalTensor(spec, base + 2, d * d);
    lp.wo = NormalTensor(spec, base + 3, d * d);
    lp.ln2_gain.assign(d, 1.0);
    lp.ln2_bias.assign(d, 0.0);
    lp.w_in = NormalTensor(spec, base + 4, f * d);
    lp.b_in.assign(f, 0.0);
    lp.w_out = NormalTensor(spec, base + 5, f * d);
    lp.b_out.assign(d, 0.0);
  }
  p.final_gain.assign(d, 1.0);
  p.final_bias.assign(d, 0.0);
  return p;
}

std::uint64_t ParameterChecksum(const ModelParameters& params) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = Fnv1a(h, params.token_embedding);
  h = Fnv1a(h, params.position_embedding);
  for (const LayerParameters& lp : params.layers) {
    for (const auto* t : {&lp.ln1_gain, &lp.ln1_bias, &lp.wq, &lp.wk, &lp.wv,
                          &lp.wo, &lp.ln2_gain, &lp.ln2_bias, &lp.w_in,
                          &lp.b_in, &lp.w_out, &lp.b_out}) {
      h = Fnv1a(h, *t);
    }
  }
  h = Fnv1a(h, params.final_gain);
  h = Fnv1a(h, params.final_bias);
  return h;
}

Tokenizer::Tokenizer(int vocab_size, std::vector<std::string> words) {
  if (vocab_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "vocab_size must be >= 1");
  }
  static const char* kSpecial[] = {"<bos>", "<eos>", "<unk>"};
  words_.reserve(vocab_size);
  for (int id = 0; id < vocab_size; ++id) {
    std::string word;
    if (id < 3) {
      word = kSpecial[id];
    } else if (static_cast<std::size_t>(id - 3) < words.size()) {
      word = Lower(words[id - 3]);
    } else {
      word = "w" + std::to_string(id);
    }
    if (!ids_.emplace(word, id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate vocabulary word '" + word + "'");
    }
    words_.push_back(std::move(word));
  }
}

std::vector<int> Tokenizer::Encode(std::string_view text) const {
  std::vector<int> ids;
  std::istringstream in{std::string(text)};
  std::string word;
  const int v = vocab_size();
  while (in >> word) {
    word = Lower(word);
    if (auto it = ids_.find(word); it != ids_.end()) {
      ids.push_back(it->second);
    } else if (v > 3) {
      std::uint64_t h = 0xCBF29CE484222325ULL;
      for (unsigned char c : word) {
        h ^= c;
        h *= 0x100000001B3ULL;
      }
      ids.push_back(3 + static_cast<int>(h % static_cast<std::uint64_t>(v - 3)));
    } else {
      ids.push_back(std::min(kUnk, v - 1));
    }
  }
  return ids;
}

std::string Tokenizer::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (!out.empty()) out += ' ';
    out += Word(id);
  }
  return out;
}

const std::string& Tokenizer::Word(int id) const {
  if (id < 0 || id >= vocab_size()) {
    throw Error(ErrorCode::kOutOfRange, "token id " + std::to_string(id) +
                                            " outside vocabulary");
  }
  return words_[id];
}

std::vector<double> Backend::ActivationGradientPath(
    const PromptAnswerPair& pair, const NeuronRef& neuron,
    std::span<const double> alphas) const {
  std::vector<double> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(ActivationGradient(pair, neuron, a));
  return out;
}

double Backend::AnswerProbability(const PromptAnswerPair& pair) const {
  return std::exp(AnswerLogProb(pair));
}

ToyModel::ToyModel(ModelSpec spec, ModelParameters params, Tokenizer tokenizer)
    : spec_(spec), params_(std::move(params)), tokenizer_(std::move(tokenizer)) {
  ValidateSpec(spec_);
  const auto d = static_cast<std::size_t>(spec_.d_model);
  const auto f = static_cast<std::size_t>(spec_.d_ff);
  auto expect = [](const std::vector<double>& t, std::size_t n, const char* name) {
    if (t.size() != n) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("parameter tensor ") + name + " has size " +
                      std::to_string(t.size()) + ", expected " + std::to_string(n));
    }
    for (double v : t) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFinite,
                    std::string("parameter tensor ") + name + " is not finite");
      }
    }
  };
  expect(params_.token_embedding, spec_.vocab_size * d, "token_embedding");
  expect(params_.position_embedding, spec_.max_context * d, "position_embedding");
  if (params_.layers.size() != static_cast<std::size_t>(spec_.n_layers)) {
    throw Error(ErrorCode::kInvalidArgument, "layer count mismatch");
  }
  for (const LayerParameters& lp : params_.layers) {
    expect(lp.ln1_gain, d, "ln1_gain");
    expect(lp.ln1_bias, d, "ln1_bias");
    expect(lp.wq, d * d, "wq");
    expect(lp.wk, d * d, "wk");
    expect(lp.wv, d * d, "wv");
    expect(lp.wo, d * d, "wo");
    expect(lp.ln2_gain, d, "ln2_gain");
    expect(lp.ln2_bias, d, "ln2_bias");
    expect(lp.w_in, f * d, "w_in");
    expect(lp.b_in, f, "b_in");
    expect(lp.w_out, f * d, "w_out");
    expect(lp.b_out, d, "b_out");
  }
  expect(params_.final_gain, d, "final_gain");
  expect(params_.final_bias, d, "final_bias");
  if (tokenizer_.vocab_size() != spec_.vocab_size) {
    throw Error(ErrorCode::kInvalidArgument, "tokenizer/model vocab mismatch");
  }
}

void ToyModel::CheckPair(const TokenPair& pair) const {
  if (pair.answer.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "answer must be non-empty");
  }
  if (pair.prompt.size() + pair.answer.size() >
      static_cast<std::size_t>(spec_.max_context)) {
    throw Error(ErrorCode::kOutOfRange,
                "prompt + answer length " +
                    std::to_string(pair.prompt.size() + pair.answer.size()) +
                    " exceeds max_context " + std::to_string(spec_.max_context));
  }
  for (const auto* seq : {&pair.prompt, &pair.answer}) {
    for (int id : *seq) {
      if (id < 0 || id >= spec_.vocab_size) {
        throw Error(ErrorCode::kOutOfRange,
                    "token id " + std::to_string(id) + " outside vocabulary");
      }
    }
  }
}

double ToyModel::AnswerLogProb(const TokenPair& pair,
                               const ActivationOverrides* overrides) const {
  CheckPair(pair);
  std::vector<Pin<double>> pins;
  if (overrides != nullptr) {
    for (const auto& [ref, value] : *overrides) {
      CheckNeuron(spec_, ref);
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::kNonFinite, "override value is not finite");
      }
      pins.push_back({ref, value});
    }
  }
  return AnswerLogProbT<double>(spec_, params_, pair, pins);
}

double ToyModel::AnswerProbability(const TokenPair& pair,
                                   const ActivationOverrides* overrides) const {
  return std::exp(AnswerLogProb(pair, overrides));
}

ActivationSnapshot ToyModel::CaptureActivations(const TokenPair& pair) const {
  CheckPair(pair);
  ActivationSnapshot snap;
  snap.space = neuron_space();
  snap.values.assign(snap.space.size(), 0.0);
  const std::vector<int> seq = BuildSequence(pair);
  RunBlocks<double>(spec_, params_, seq, pair.prompt.size(), {}, &snap.values);
  const double count = static_cast<double>(pair.answer.size());
  for (double& v : snap.values) {
    v /= count;
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "non-finite activation");
    }
  }
  return snap;
}

double ToyModel::PinnedGradient(const TokenPair& pair, const NeuronRef& neuron,
                                double value) const {
  CheckPair(pair);
  CheckNeuron(spec_, neuron);
  const Pin<Dual> pin{neuron, Dual(value, 1.0)};
  const Dual logp = AnswerLogProbT<Dual>(spec_, params_, pair, {&pin, 1});
  const double grad = std::exp(logp.v) * logp.d;
  if (!std::isfinite(grad)) {
    throw Error(ErrorCode::kNonFinite, "non-finite activation gradient");
  }
  return grad;
}

double ToyModel::ActivationGradient(const TokenPair& pair,
                                    const NeuronRef& neuron,
                                    double alpha) const {
  const double a[] = {alpha};
  return ActivationGradientPath(pair, neuron, a).front();
}

std::vector<double> ToyModel::ActivationGradientPath(
    const TokenPair& pair, const NeuronRef& neuron,
    std::span<const double> alphas) const {
  CheckNeuron(spec_, neuron);
  for (double a : alphas) CheckAlpha(a);
  const double base = CaptureActivations(pair).at(neuron);
  std::vector<double> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(PinnedGradient(pair, neuron, a * base));
  return out;
}

std::vector<int> ToyModel::GenerateTokens(std::span<const int> prompt,
                                          const GenerationConfig& config) const {
  if (prompt.size() + 1 > static_cast<std::size_t>(spec_.max_context)) {
    throw Error(ErrorCode::kOutOfRange, "prompt of " +
                                            std::to_string(prompt.size()) +
                                            " tokens overflows the context");
  }
  if (!(config.temperature >= 0.0) || !std::isfinite(config.temperature)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  for (int id : prompt) {
    if (id < 0 || id >= spec_.vocab_size) {
      throw Error(ErrorCode::kOutOfRange, "token id outside vocabulary");
    }
  }
  std::vector<int> seq;
  seq.push_back(Tokenizer::kBos);
  seq.insert(seq.end(), prompt.begin(), prompt.end());
  std::mt19937_64 rng(config.trial_seed);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < config.max_new_tokens &&
         seq.size() <= static_cast<std::size_t>(spec_.max_context)) {
    const auto hidden =
        RunBlocks<double>(spec_, params_, seq, seq.size(), {}, nullptr);
    std::vector<double> logits = Logits(spec_, params_, hidden.back());
    logits[Tokenizer::kBos] = -std::numeric_limits<double>::infinity();
    int next = 0;
    if (config.temperature == 0.0 || spec_.vocab_size == 1) {
      next = static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                              logits.begin());
    } else {
      const double top = *std::max_element(logits.begin(), logits.end());
      std::vector<double> weights(logits.size());
      double total = 0.0;
      for (std::size_t v = 0; v < logits.size(); ++v) {
        weights[v] = std::exp((logits[v] - top) / config.temperature);
        total += weights[v];
      }
      const double u =
          static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
      double acc = 0.0;
      next = static_cast<int>(logits.size()) - 1;
      for (std::size_t v = 0; v < weights.size(); ++v) {
        acc += weights[v];
        if (u < acc) {
          next = static_cast<int>(v);
          break;
        }
      }
    }
    if (next == Tokenizer::kEos) break;
    out.push_back(next);
    seq.push_back(next);
  }
  return out;
}

TokenPair ToyModel::Tokenize(const PromptAnswerPair& pair) const {
  return {tokenizer_.Encode(pair.prompt), tokenizer_.Encode(pair.answer)};
}

std::shared_ptr<const ToyModel> BuildToyModel(const ModelSpec& spec) {
  return std::make_shared<const ToyModel>(spec, InitializeParameters(spec),
                                          Tokenizer(spec.vocab_size));
}

ToyBackend::ToyBackend(std::shared_ptr<const ToyModel> model,
                       double default_temperature)
    : model_(std::move(model)), default_temperature_(default_temperature) {}

BackendMeta ToyBackend::Meta() const {
  return {model_->spec().n_layers, model_->spec().d_ff, default_temperature_};
}

std::string ToyBackend::Generate(std::string_view prompt,
                                 const GenerationConfig& config) const {
  const std::vector<int> ids = model_->tokenizer().Encode(prompt);
  return model_->tokenizer().Decode(model_->GenerateTokens(ids, config));
}

double ToyBackend::AnswerLogProb(const PromptAnswerPair& pair) const {
  return model_->AnswerLogProb(model_->Tokenize(pair));
}

ActivationSnapshot ToyBackend::CaptureActivations(
    const PromptAnswerPair& pair) const {
  ActivationSnapshot snap = model_->CaptureActivations(model_->Tokenize(pair));
  snap.pair_id = pair.id;
  return snap;
}

double ToyBackend::ActivationGradient(const PromptAnswerPair& pair,
                                      const NeuronRef& neuron,
                                      double alpha) const {
  return model_->ActivationGradient(model_->Tokenize(pair), neuron, alpha);
}

std::vector<double> ToyBackend::ActivationGradientPath(
    const PromptAnswerPair& pair, const NeuronRef& neuron,
    std::span<const double> alphas) const {
  return model_->ActivationGradientPath(model_->Tokenize(pair), neuron, alphas);
}

}  // namespace crossrisk::model
