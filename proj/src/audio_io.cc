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

#include "fvae/error.hpp"
#include "fvae/io.hpp"

namespace fvae {

namespace {

template <typename T>
T ReadLe(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

template <typename T>
void WriteLe(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

AudioClip ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  FVAE_CHECK(in.good(), ErrorCode::kIoError, "cannot open " + path);
  char tag[4];
  in.read(tag, 4);
  FVAE_CHECK(in && std::memcmp(tag, "RIFF", 4) == 0, ErrorCode::kFormatError,
             path + ": not a RIFF file");
  ReadLe<std::uint32_t>(in);
  in.read(tag, 4);
  FVAE_CHECK(in && std::memcmp(tag, "WAVE", 4) == 0, ErrorCode::kFormatError,
             path + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (in) {
    in.read(tag, 4);
    if (!in) break;
    const auto size = ReadLe<std::uint32_t>(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = ReadLe<std::uint16_t>(in);
      channels = ReadLe<std::uint16_t>(in);
      rate = ReadLe<std::uint32_t>(in);
      ReadLe<std::uint32_t>(in);
      ReadLe<std::uint16_t>(in);
      bits = ReadLe<std::uint16_t>(in);
      in.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      FVAE_CHECK(have_fmt, ErrorCode::kFormatError, path + ": data before fmt");
      FVAE_CHECK(channels == 1, ErrorCode::kFormatError,
                 path + ": only mono audio is supported");
      AudioClip clip;
      clip.sample_rate = static_cast<int>(rate);
      if (format == 1 && bits == 16) {
        clip.samples.resize(size / 2);
        for (float& s : clip.samples)
          s = static_cast<float>(ReadLe<std::int16_t>(in)) / 32768.0f;
      } else if (format == 3 && bits == 32) {
        clip.samples.resize(size / 4);
        in.read(reinterpret_cast<char*>(clip.samples.data()),
                static_cast<std::streamsize>(clip.samples.size() * 4));
      } else {
        Fail(ErrorCode::kFormatError,
             path + ": unsupported sample format (need PCM16 or float32)");
      }
      FVAE_CHECK(in.good(), ErrorCode::kFormatError, path + ": truncated data");
      return clip;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  Fail(ErrorCode::kFormatError, path + ": no data chunk");
}

void WriteWav(const std::string& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  FVAE_CHECK(out.good(), ErrorCode::kIoError, "cannot write " + path);
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 4);
  out.write("RIFF", 4);
  WriteLe<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  WriteLe<std::uint32_t>(out, 16);
  WriteLe<std::uint16_t>(out, 3);
  WriteLe<std::uint16_t>(out, 1);
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate));
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate) * 4);
  WriteLe<std::uint16_t>(out, 4);
  WriteLe<std::uint16_t>(out, 32);
  out.write("data", 4);
  WriteLe<std::uint32_t>(out, data_bytes);
  out.write(reinterpret_cast<const char*>(clip.samples.data()), data_bytes);
  FVAE_CHECK(out.good(), ErrorCode::kIoError, "write failed: " + path);
}

}  // namespace fvae
