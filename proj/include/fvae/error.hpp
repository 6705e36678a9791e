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

#ifndef FVAE_ERROR_HPP_
#define FVAE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fvae {

// Numeric values are mirrored by fvae_status in fvae.h.
enum class ErrorCode {
  kOk = 0,
  kInputTooShort = 1,
  kDomainError = 2,
  kDegenerateBand = 3,
  kInsufficientData = 4,
  kConfigError = 5,
  kShapeError = 6,
  kLabelError = 7,
  kSegmentTooShort = 8,
  kAlignmentError = 9,
  kNumericalError = 10,
  kIoError = 11,
  kFormatError = 12,
  kUsageError = 13,
  kInternal = 14,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace fvae

#define FVAE_CHECK(cond, code, msg)                 \
  do {                                              \
    if (!(cond)) ::fvae::Fail((code), (msg));       \
  } while (0)

#endif  // FVAE_ERROR_HPP_
