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

#include "fvae/adversaries.hpp"

namespace fvae {

const char* AdversaryKindName(AdversaryKind k) {
  return k == AdversaryKind::kCpc ? "cpc" : "speaker_clf";
}

AdversaryKind ParseAdversaryKind(const std::string& s) {
  if (s == "cpc") return AdversaryKind::kCpc;
  if (s == "speaker_clf") return AdversaryKind::kSpeakerClassifier;
  Fail(ErrorCode::kConfigError, "unknown adversary kind '" + s + "'");
}

void AdversaryConfig::Validate() const {
  FVAE_CHECK(input_dim >= 1 && hidden >= 1 && hidden_kernel >= 1 && n_resblocks >= 0,
             ErrorCode::kConfigError, "invalid adversary network configuration");
  if (kind == AdversaryKind::kSpeakerClassifier) {
    FVAE_CHECK(n_speakers >= 1, ErrorCode::kConfigError,
               "speaker classifier needs n_speakers >= 1");
  } else {
    FVAE_CHECK(cpc_dim >= 1 && cpc_steps >= 1, ErrorCode::kConfigError,
               "CPC adversary needs D_h >= 1 and n >= 1");
  }
}

}  // namespace fvae
