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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fvae/error.hpp"
#include "fvae/io.hpp"
#include "json.hpp"

namespace fvae {

namespace {
constexpr char kMagic[8] = {'F', 'V', 'A', 'E', 'F', 'E', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void WriteFeatureArchive(const std::string& path, const FeatureArchive& a) {
  const MelSpectrogram& x = a.features;
  nlohmann::json header = {{"utterance_id", a.utterance_id},
                           {"speaker_id", a.speaker_id},
                           {"F", x.bands()},
                           {"T", x.frames()},
                           {"norm_state", NormStateName(x.norm_state)}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  FVAE_CHECK(out.good(), ErrorCode::kIoError, "cannot write " + path);
  out.write(kMagic, 8);
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&kVersion), 4);
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(text.data(), len);
  // Eigen storage is column-major; the archive is row-major.
  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      rows = x.values;
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(rows.size() * sizeof(float)));
  FVAE_CHECK(out.good(), ErrorCode::kIoError, "write failed: " + path);
}

FeatureArchive ReadFeatureArchive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  FVAE_CHECK(in.good(), ErrorCode::kIoError, "cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  FVAE_CHECK(in && std::memcmp(magic, kMagic, 8) == 0, ErrorCode::kFormatError,
             path + ": not a feature archive");
  std::uint32_t version = 0, len = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&len), 4);
  FVAE_CHECK(in && version == kVersion, ErrorCode::kFormatError,
             path + ": unsupported archive version");
  std::string text(len, '\0');
  in.read(text.data(), len);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, path + ": bad header: " + e.what());
  }
  for (const char* key : {"utterance_id", "speaker_id", "F", "T", "norm_state"})
    FVAE_CHECK(header.contains(key), ErrorCode::kFormatError,
               path + ": header missing " + key);
  FeatureArchive a;
  a.utterance_id = header["utterance_id"].get<std::string>();
  a.speaker_id = header["speaker_id"].get<std::string>();
  const int bands = header["F"].get<int>();
  const int frames = header["T"].get<int>();
  FVAE_CHECK(bands >= 1 && frames >= 1, ErrorCode::kFormatError,
             path + ": empty archive");
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
      bands, frames);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(rows.size() * sizeof(float)));
  FVAE_CHECK(in.good(), ErrorCode::kFormatError, path + ": truncated payload");
  a.features.values = rows;
  a.features.norm_state = ParseNormState(header["norm_state"].get<std::string>());
  return a;
}

void WriteLabels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  FVAE_CHECK(out.good(), ErrorCode::kIoError, "cannot write " + path);
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << (i ? " " : "") << labels[i];
  out << "\n";
}

std::vector<int> ReadLabels(const std::string& path) {
  std::ifstream in(path);
  FVAE_CHECK(in.good(), ErrorCode::kIoError, "cannot open " + path);
  std::vector<int> labels;
  int v;
  while (in >> v) labels.push_back(v);
  FVAE_CHECK(in.eof(), ErrorCode::kFormatError, path + ": non-integer label");
  return labels;
}

}  // namespace fvae
