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

#ifndef FVAE_CHECKPOINT_HPP_
#define FVAE_CHECKPOINT_HPP_

// Parameter archives keyed by module path. Layout: "FVAECKPT", u32 format
// version, u64 model-config hash, u32 metadata length, metadata JSON, u32
// entry count, then per entry: u32 name length, name, u32 rows, u32 cols,
// row-major float32 values.

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fvae/nn/optim.hpp"

namespace fvae {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorArchive {
  std::uint32_t format_version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  std::string metadata = "{}";
  std::map<std::string, Eigen::MatrixXf> tensors;

  const Eigen::MatrixXf& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors.count(name) != 0; }
};

void SaveArchive(const std::string& path, const TensorArchive& archive);
TensorArchive LoadArchive(const std::string& path);

template <typename T>
void StoreParams(TensorArchive& a, const std::vector<nn::Param<T>*>& params) {
  for (const nn::Param<T>* p : params) a.tensors[p->name] = p->value.template cast<float>();
}

template <typename T>
void RestoreParams(const TensorArchive& a, const std::vector<nn::Param<T>*>& params) {
  for (nn::Param<T>* p : params) {
    const Eigen::MatrixXf& m = a.at(p->name);
    FVAE_CHECK(m.rows() == p->value.rows() && m.cols() == p->value.cols(),
               ErrorCode::kShapeError, "checkpoint tensor '" + p->name + "' has wrong shape");
    p->value = m.cast<T>();
  }
}

template <typename T>
void StoreOptimizer(TensorArchive& a, const std::string& prefix, nn::Adam<T>& opt) {
  const auto& params = opt.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    a.tensors[prefix + ".m." + params[i]->name] = opt.first_moments()[i].template cast<float>();
    a.tensors[prefix + ".v." + params[i]->name] = opt.second_moments()[i].template cast<float>();
  }
  a.tensors[prefix + ".step"] =
      Eigen::MatrixXf::Constant(1, 1, static_cast<float>(opt.step_count()));
}

template <typename T>
void RestoreOptimizer(const TensorArchive& a, const std::string& prefix, nn::Adam<T>& opt) {
  const auto& params = opt.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    opt.first_moments()[i] = a.at(prefix + ".m." + params[i]->name).template cast<T>();
    opt.second_moments()[i] = a.at(prefix + ".v." + params[i]->name).template cast<T>();
  }
  opt.set_step_count(static_cast<long long>(a.at(prefix + ".step")(0, 0)));
}

}  // namespace fvae

#endif  // FVAE_CHECKPOINT_HPP_
