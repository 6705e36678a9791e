// Copyright 2026 The fvae Authors. All Rights Reserved.
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

#include "fvae/error.hpp"

namespace fvae {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInputTooShort: return "InputTooShort";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kDegenerateBand: return "DegenerateBand";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kLabelError: return "LabelError";
    case ErrorCode::kSegmentTooShort: return "SegmentTooShort";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kNumericalError: return "NumericalError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUsageError: return "UsageError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(ErrorCodeName(code)) + ": " + message);
}

}  // namespace fvae
