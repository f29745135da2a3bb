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

// Step-by-step reference forward pass for the toy transformer, written
// straight from the architecture description with plain loops. It shares no
// code with the library forward and is only used as a test oracle.

#ifndef CROSSRISK_TESTS_FORWARD_ORACLE_HPP_
#define CROSSRISK_TESTS_FORWARD_ORACLE_HPP_

#include <cmath>
#include <vector>

#include "crossrisk/model.hpp"

namespace crossrisk::testing {

struct OracleResult {
  double probability = 0.0;
  // activations[layer][answer position i][neuron]
  std::vector<std::vector<std::vector<double>>> activations;
};

inline std::vector<double> OracleLayerNorm(const std::vector<double>& x,
                                           const std::vector<double>& g,
                                           const std::vector<double>& b) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= x.size();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = g[i] * (x[i] - mean) / std::sqrt(var + 1e-5) + b[i];
  }
  return y;
}

inline OracleResult OracleForward(const model::ModelSpec& spec,
                                  const model::ModelParameters& p,
                                  const model::TokenPair& pair) {
  const int d = spec.d_model;
  const int f = spec.d_ff;
  std::vector<int> tokens = {0};
  for (int t : pair.prompt) tokens.push_back(t);
  for (std::size_t i = 0; i + 1 < pair.answer.size(); ++i) {
    tokens.push_back(pair.answer[i]);
  }
  const int n = static_cast<int>(tokens.size());
  const int first = static_cast<int>(pair.prompt.size());

  std::vector<std::vector<double>> resid(n, std::vector<double>(d));
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < d; ++i) {
      resid[t][i] = p.token_embedding[tokens[t] * d + i] +
                    p.position_embedding[t * d + i];
    }
  }

  OracleResult out;
  out.activations.assign(
      spec.n_layers,
      std::vector<std::vector<double>>(pair.answer.size(), std::vector<double>(f)));

  for (int l = 0; l < spec.n_layers; ++l) {
    const auto& L = p.layers[l];
    std::vector<std::vector<double>> qs(n), ks(n), vs(n);
    for (int t = 0; t < n; ++t) {
      auto u = OracleLayerNorm(resid[t], L.ln1_gain, L.ln1_bias);
      qs[t].assign(d, 0);
      ks[t].assign(d, 0);
      vs[t].assign(d, 0);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
          qs[t][r] += L.wq[r * d + c] * u[c];
          ks[t][r] += L.wk[r * d + c] * u[c];
          vs[t][r] += L.wv[r * d + c] * u[c];
        }
      }
    }
    std::vector<std::vector<double>> attn_out(n, std::vector<double>(d, 0));
    for (int t = 0; t < n; ++t) {
      std::vector<double> w(t + 1);
      double z = 0;
      for (int s = 0; s <= t; ++s) {
        double dot = 0;
        for (int i = 0; i < d; ++i) dot += qs[t][i] * ks[s][i];
        w[s] = std::exp(dot / std::sqrt(static_cast<double>(d)));
        z += w[s];
      }
      std::vector<double> ctx(d, 0);
      for (int s = 0; s <= t; ++s) {
        for (int i = 0; i < d; ++i) ctx[i] += w[s] / z * vs[s][i];
      }
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) attn_out[t][r] += L.wo[r * d + c] * ctx[c];
      }
    }
    for (int t = 0; t < n; ++t) {
      for (int i = 0; i < d; ++i) resid[t][i] += attn_out[t][i];
    }
    for (int t = 0; t < n; ++t) {
      auto u = OracleLayerNorm(resid[t], L.ln2_gain, L.ln2_bias);
      std::vector<double> act(f);
      for (int k = 0; k < f; ++k) {
        double pre = L.b_in[k];
        for (int c = 0; c < d; ++c) pre += L.w_in[k * d + c] * u[c];
        act[k] = pre * 0.5 * (1.0 + std::erf(pre / std::sqrt(2.0)));
      }
      if (t >= first) out.activations[l][t - first] = act;
      for (int i = 0; i < d; ++i) {
        double o = L.b_out[i];
        for (int k = 0; k < f; ++k) o += act[k] * L.w_out[k * d + i];
        resid[t][i] += o;
      }
    }
  }

  double logp = 0;
  for (std::size_t i = 0; i < pair.answer.size(); ++i) {
    auto h = OracleLayerNorm(resid[first + i], p.final_gain, p.final_bias);
    std::vector<double> logits(spec.vocab_size);
    double z = 0;
    for (int v = 0; v < spec.vocab_size; ++v) {
      double dot = 0;
      for (int c = 0; c < d; ++c) dot += p.token_embedding[v * d + c] * h[c];
      logits[v] = std::fmin(30.0, std::fmax(-30.0, dot));
      z += std::exp(logits[v]);
    }
    logp += logits[pair.answer[i]] - std::log(z);
  }
  out.probability = std::exp(logp);
  return out;
}

}  // namespace crossrisk::testing

#endif  // CROSSRISK_TESTS_FORWARD_ORACLE_HPP_
