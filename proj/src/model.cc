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

#include "fvae/model.hpp"

#include "fvae/error.hpp"
#include "json.hpp"

namespace fvae {

const char* NormKindName(nn::NormKind k) {
  switch (k) {
    case nn::NormKind::kBatch: return "batch";
    case nn::NormKind::kInstance: return "instance";
    case nn::NormKind::kNone: return "none";
  }
  return "batch";
}

nn::NormKind ParseNormKind(const std::string& s) {
  if (s == "batch") return nn::NormKind::kBatch;
  if (s == "instance") return nn::NormKind::kInstance;
  if (s == "none") return nn::NormKind::kNone;
  Fail(ErrorCode::kConfigError, "unknown norm kind '" + s + "'");
}

void ModelConfig::Validate() const {
  FVAE_CHECK(n_mels >= 1 && content_dim >= 1 && speaker_dim >= 1,
             ErrorCode::kConfigError, "model dimensions must be >= 1");
  FVAE_CHECK(downsample >= 1, ErrorCode::kConfigError, "S_ds must be >= 1");
  FVAE_CHECK(beta >= 0.0, ErrorCode::kConfigError, "beta must be >= 0");
  FVAE_CHECK(hidden >= 1 && hidden_kernel >= 1 && n_resblocks >= 0,
             ErrorCode::kConfigError, "invalid hidden layer configuration");
  FVAE_CHECK(log_var_min < log_var_max, ErrorCode::kConfigError,
             "invalid log-variance clamp");
}

std::string ModelConfig::ToJson() const {
  nlohmann::json j = {{"n_mels", n_mels},
                      {"content_dim", content_dim},
                      {"speaker_dim", speaker_dim},
                      {"downsample", downsample},
                      {"beta", beta},
                      {"hidden", hidden},
                      {"hidden_kernel", hidden_kernel},
                      {"n_resblocks", n_resblocks},
                      {"content_norm", NormKindName(content_norm)},
                      {"speaker_norm", NormKindName(speaker_norm)},
                      {"decoder_norm", NormKindName(decoder_norm)},
                      {"log_var_min", log_var_min},
                      {"log_var_max", log_var_max},
                      {"init_seed", init_seed}};
  return j.dump(2);
}

ModelConfig ModelConfig::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, std::string("model config: ") + e.what());
  }
  ModelConfig c;
  try {
    c.n_mels = j.value("n_mels", c.n_mels);
    c.content_dim = j.value("content_dim", c.content_dim);
    c.speaker_dim = j.value("speaker_dim", c.speaker_dim);
    c.downsample = j.value("downsample", c.downsample);
    c.beta = j.value("beta", c.beta);
    c.hidden = j.value("hidden", c.hidden);
    c.hidden_kernel = j.value("hidden_kernel", c.hidden_kernel);
    c.n_resblocks = j.value("n_resblocks", c.n_resblocks);
    c.content_norm = ParseNormKind(j.value("content_norm", std::string("instance")));
    c.speaker_norm = ParseNormKind(j.value("speaker_norm", std::string("batch")));
    c.decoder_norm = ParseNormKind(j.value("decoder_norm", std::string("batch")));
    c.log_var_min = j.value("log_var_min", c.log_var_min);
    c.log_var_max = j.value("log_var_max", c.log_var_max);
    c.init_seed = j.value("init_seed", c.init_seed);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfigError, std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

std::uint64_t ModelConfig::Hash() const {
  ModelConfig canonical = *this;
  canonical.init_seed = 0;
  const std::string text = nlohmann::json::parse(canonical.ToJson()).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace fvae
