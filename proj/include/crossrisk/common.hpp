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

#ifndef CROSSRISK_COMMON_HPP_
#define CROSSRISK_COMMON_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crossrisk {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kNonFinite,
  kBackend,
  kBackendUnreachable,
  kIo,
  kFormat,
  kNoConflictNeurons,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library. The code lets callers (the CLI in
// particular) map failures onto exit statuses without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class RiskTag { kSafety, kFairness, kPrivacy };

// Trend-consistency marks: consistent, inconsistent, uncertain.
enum class Verdict { kConsistent, kInconsistent, kUncertain };

std::string_view VerdictName(Verdict v);
Verdict ParseVerdict(std::string_view name);

std::string_view RiskTagName(RiskTag tag);
RiskTag ParseRiskTag(std::string_view name);

// Index of one FFN intermediate unit: layer l, neuron k.
struct NeuronRef {
  int layer = 0;
  int neuron = 0;

  friend auto operator<=>(const NeuronRef&, const NeuronRef&) = default;
  friend bool operator==(const NeuronRef&, const NeuronRef&) = default;
};

std::string ToString(const NeuronRef& ref);

// Geometry of the neuron space: (n_layers, d_ff).
struct NeuronSpace {
  int n_layers = 0;
  int d_ff = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(n_layers) * static_cast<std::size_t>(d_ff);
  }
  bool contains(const NeuronRef& ref) const {
    return ref.layer >= 0 && ref.layer < n_layers && ref.neuron >= 0 &&
           ref.neuron < d_ff;
  }
  std::size_t index(const NeuronRef& ref) const {
    return static_cast<std::size_t>(ref.layer) * static_cast<std::size_t>(d_ff) +
           static_cast<std::size_t>(ref.neuron);
  }
  NeuronRef at(std::size_t flat) const {
    return {static_cast<int>(flat / static_cast<std::size_t>(d_ff)),
            static_cast<int>(flat % static_cast<std::size_t>(d_ff))};
  }

  friend bool operator==(const NeuronSpace&, const NeuronSpace&) = default;
};

}  // namespace crossrisk

template <>
struct std::hash<crossrisk::NeuronRef> {
  std::size_t operator()(const crossrisk::NeuronRef& r) const noexcept {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r.layer)) << 32) |
        static_cast<std::uint32_t>(r.neuron));
  }
};

#endif  // CROSSRISK_COMMON_HPP_
