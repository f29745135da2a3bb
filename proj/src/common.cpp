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

#include "crossrisk/common.hpp"

#include <string>

namespace crossrisk {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kOutOfRange:
      return "out-of-range";
    case ErrorCode::kNonFinite:
      return "non-finite";
    case ErrorCode::kBackend:
      return "backend";
    case ErrorCode::kBackendUnreachable:
      return "backend-unreachable";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kFormat:
      return "format";
    case ErrorCode::kNoConflictNeurons:
      return "no-conflict-neurons";
  }
  return "unknown";
}

std::string_view RiskTagName(RiskTag tag) {
  switch (tag) {
    case RiskTag::kSafety:
      return "safety";
    case RiskTag::kFairness:
      return "fairness";
    case RiskTag::kPrivacy:
      return "privacy";
  }
  return "unknown";
}

RiskTag ParseRiskTag(std::string_view name) {
  if (name == "safety") return RiskTag::kSafety;
  if (name == "fairness") return RiskTag::kFairness;
  if (name == "privacy") return RiskTag::kPrivacy;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown risk dimension '" + std::string(name) + "'");
}

std::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kConsistent:
      return "consistent";
    case Verdict::kInconsistent:
      return "inconsistent";
    case Verdict::kUncertain:
      return "uncertain";
  }
  return "unknown";
}

Verdict ParseVerdict(std::string_view name) {
  if (name == "consistent") return Verdict::kConsistent;
  if (name == "inconsistent") return Verdict::kInconsistent;
  if (name == "uncertain") return Verdict::kUncertain;
  throw Error(ErrorCode::kFormat, "unknown verdict '" + std::string(name) + "'");
}

std::string ToString(const NeuronRef& ref) {
  return "L" + std::to_string(ref.layer) + "N" + std::to_string(ref.neuron);
}

}  // namespace crossrisk
