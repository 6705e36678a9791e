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

#include "fvae/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "fvae/error.hpp"

namespace fvae {
namespace {

constexpr char kMagic[8] = {'F', 'V', 'A', 'E', 'C', 'K', 'P', 'T'};

template <typename U>
void Put(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U Get(std::istream& is, const std::string& path) {
  U v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(U));
  FVAE_CHECK(is.good(), ErrorCode::kFormatError, "truncated checkpoint " + path);
  return v;
}

std::string GetString(std::istream& is, std::uint32_t n, const std::string& path) {
  FVAE_CHECK(n < (1u << 28), ErrorCode::kFormatError, "corrupt checkpoint " + path);
  std::string s(n, '\0');
  is.read(s.data(), n);
  FVAE_CHECK(is.good() || n == 0, ErrorCode::kFormatError, "truncated checkpoint " + path);
  return s;
}

}  // namespace

const Eigen::MatrixXf& TensorArchive::at(const std::string& name) const {
  auto it = tensors.find(name);
  FVAE_CHECK(it != tensors.end(), ErrorCode::kFormatError,
             "checkpoint has no tensor '" + name + "'");
  return it->second;
}

void SaveArchive(const std::string& path, const TensorArchive& a) {
  std::ofstream os(path, std::ios::binary);
  FVAE_CHECK(os.good(), ErrorCode::kIoError, "cannot write " + path);
  os.write(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(os, a.format_version);
  Put<std::uint64_t>(os, a.config_hash);
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(a.metadata.size()));
  os.write(a.metadata.data(), static_cast<std::streamsize>(a.metadata.size()));
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(a.tensors.size()));
  for (const auto& [name, m] : a.tensors) {
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    os.write(reinterpret_cast<const char*>(rm.data()),
             static_cast<std::streamsize>(rm.size() * sizeof(float)));
  }
  FVAE_CHECK(os.good(), ErrorCode::kIoError, "failed writing " + path);
}

TensorArchive LoadArchive(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  FVAE_CHECK(is.good(), ErrorCode::kIoError, "cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  FVAE_CHECK(is.good() && std::memcmp(magic, kMagic, sizeof(magic)) == 0,
             ErrorCode::kFormatError, path + " is not a checkpoint");
  TensorArchive a;
  a.format_version = Get<std::uint32_t>(is, path);
  FVAE_CHECK(a.format_version == kCheckpointVersion, ErrorCode::kFormatError,
             "unsupported checkpoint version " + std::to_string(a.format_version));
  a.config_hash = Get<std::uint64_t>(is, path);
  a.metadata = GetString(is, Get<std::uint32_t>(is, path), path);
  const std::uint32_t n = Get<std::uint32_t>(is, path);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = GetString(is, Get<std::uint32_t>(is, path), path);
    const std::uint32_t rows = Get<std::uint32_t>(is, path);
    const std::uint32_t cols = Get<std::uint32_t>(is, path);
    FVAE_CHECK(static_cast<std::uint64_t>(rows) * cols < (1ull << 30),
               ErrorCode::kFormatError, "corrupt tensor size in " + path);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    is.read(reinterpret_cast<char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(float)));
    FVAE_CHECK(is.good() || rm.size() == 0, ErrorCode::kFormatError,
               "truncated checkpoint " + path);
    a.tensors.emplace(std::move(name), Eigen::MatrixXf(rm));
  }
  return a;
}

}  // namespace fvae
