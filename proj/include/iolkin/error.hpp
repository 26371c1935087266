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

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iolkin {

/// Failure categories shared by every module. The name of each code is part of
/// the CLI and Python surface, so codes are only ever appended.
enum class ErrorCode {
  kLengthMismatch,
  kParseError,
  kInvariantViolation,
  kEmptySequence,
  kClipTruncated,
  kArityError,
  kEmptySeries,
  kMissingFrame,
  kNoImplantationDetected,
  kEmptyMask,
  kDimensionMismatch,
  kNoOverlap,
  kDegenerateVector,
  kTooFewPoints,
  kTooFewSamples,
  kNoOrientationAfterUnfold,
  kZeroVariance,
  kDegenerateCorrelation,
  kInvalidDof,
  kNoGroundTruth,
  kSpecInvalid,
  kInsufficientBrands,
  kInvalidArgument,
  kIoError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message);
  Error(ErrorCode code, std::string message, std::size_t line);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Returns a copy tagged with the pipeline stage that raised it.
  Error with_stage(std::string stage) const;

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            std::optional<std::size_t> line,
                            const std::string& stage);

  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> line_;
  std::string stage_;
};

}  // namespace iolkin
