// Copyright 2026 The iolkin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "iolkin/error.hpp"

#include <utility>

namespace iolkin {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kClipTruncated: return "ClipTruncated";
    case ErrorCode::kArityError: return "ArityError";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kMissingFrame: return "MissingFrame";
    case ErrorCode::kNoImplantationDetected: return "NoImplantationDetected";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kDegenerateVector: return "DegenerateVector";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kNoOrientationAfterUnfold: return "NoOrientationAfterUnfold";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kDegenerateCorrelation: return "DegenerateCorrelation";
    case ErrorCode::kInvalidDof: return "InvalidDof";
    case ErrorCode::kNoGroundTruth: return "NoGroundTruth";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kInsufficientBrands: return "InsufficientBrands";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message)
    : std::runtime_error(format(code, message, std::nullopt, {})),
      code_(code),
      detail_(std::move(message)) {}

Error::Error(ErrorCode code, std::string message, std::size_t line)
    : std::runtime_error(format(code, message, line, {})),
      code_(code),
      detail_(std::move(message)),
      line_(line) {}

Error Error::with_stage(std::string stage) const {
  Error tagged = *this;
  static_cast<std::runtime_error&>(tagged) =
      std::runtime_error(format(code_, detail_, line_, stage));
  tagged.stage_ = std::move(stage);
  return tagged;
}

std::string Error::format(ErrorCode code, const std::string& message,
                          std::optional<std::size_t> line,
                          const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += error_code_name(code);
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace iolkin
