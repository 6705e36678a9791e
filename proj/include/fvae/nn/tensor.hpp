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

#ifndef FVAE_NN_TENSOR_HPP_
#define FVAE_NN_TENSOR_HPP_

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fvae/error.hpp"

namespace fvae::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// A batch of equal-length sequences stored as [channels x batch*frames].
// Item b owns the column block [b*frames, (b+1)*frames).
template <typename T>
struct Seq {
  Matrix<T> data;
  int batch = 0;
  int frames = 0;

  Seq() = default;
  Seq(int channels, int batch_size, int num_frames)
      : data(Matrix<T>::Zero(channels, static_cast<long>(batch_size) * num_frames)),
        batch(batch_size),
        frames(num_frames) {}
  Seq(Matrix<T> values, int batch_size, int num_frames)
      : data(std::move(values)), batch(batch_size), frames(num_frames) {
    FVAE_CHECK(data.cols() == static_cast<long>(batch) * frames,
               ErrorCode::kShapeError, "sequence columns != batch * frames");
  }

  int channels() const { return static_cast<int>(data.rows()); }
  auto item(int b) { return data.middleCols(static_cast<long>(b) * frames, frames); }
  auto item(int b) const {
    return data.middleCols(static_cast<long>(b) * frames, frames);
  }
};

template <typename T>
struct Param {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
  bool trainable = true;  // false for running statistics

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }
};

enum class NormKind { kBatch, kInstance, kNone };

inline std::string JoinName(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

template <typename T>
class Module {
 public:
  virtual ~Module() = default;

  // Appends parameters and buffers; names are prefixed with `prefix`.
  virtual void Collect(const std::string& prefix, std::vector<Param<T>*>& out) = 0;
  virtual void SetTraining(bool training) { training_ = training; }
  bool training() const { return training_; }

  std::vector<Param<T>*> Parameters(const std::string& prefix = "") {
    std::vector<Param<T>*> all, trainable;
    Collect(prefix, all);
    for (Param<T>* p : all)
      if (p->trainable) trainable.push_back(p);
    return trainable;
  }
  std::vector<Param<T>*> State(const std::string& prefix = "") {
    std::vector<Param<T>*> all;
    Collect(prefix, all);
    return all;
  }
  void ZeroGrad() {
    for (Param<T>* p : Parameters()) p->ZeroGrad();
  }

 protected:
  bool training_ = true;
};

}  // namespace fvae::nn

#endif  // FVAE_NN_TENSOR_HPP_
