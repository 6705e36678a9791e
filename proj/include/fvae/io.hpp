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

#ifndef FVAE_IO_HPP_
#define FVAE_IO_HPP_

// On-disk formats: WAV audio, per-utterance feature archives and the
// per-frame phone label sidecar.

#include <string>
#include <vector>

#include "fvae/features.hpp"

namespace fvae {

// Reads 16-bit PCM or 32-bit float mono WAV.
AudioClip ReadWav(const std::string& path);
// Writes 32-bit float mono WAV.
void WriteWav(const std::string& path, const AudioClip& clip);

// Feature archive layout:
//   8 bytes  magic "FVAEFEAT"
//   uint32   format version (1)
//   uint32   header length in bytes
//   header   JSON {utterance_id, speaker_id, F, T, norm_state}
//   F*T      float32, row-major (band-major), little endian
struct FeatureArchive {
  std::string utterance_id;
  std::string speaker_id;
  MelSpectrogram features;
};

void WriteFeatureArchive(const std::string& path, const FeatureArchive& a);
FeatureArchive ReadFeatureArchive(const std::string& path);

// One line of whitespace separated integers, one per frame.
void WriteLabels(const std::string& path, const std::vector<int>& labels);
std::vector<int> ReadLabels(const std::string& path);

}  // namespace fvae

#endif  // FVAE_IO_HPP_
