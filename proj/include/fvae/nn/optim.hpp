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

#ifndef FVAE_NN_OPTIM_HPP_
#define FVAE_NN_OPTIM_HPP_

#include <cmath>
#include <vector>

#include "fvae/nn/tensor.hpp"

namespace fvae::nn {

template <typename T>
double GradNorm(const std::vector<Param<T>*>& params) {
  double sq = 0.0;
  for (const Param<T>* p : params) sq += p->grad.template cast<double>().squaredNorm();
  return std::sqrt(sq);
}

// Global-norm clipping; returns the norm before clipping.
template <typename T>
double ClipGradNorm(const std::vector<Param<T>*>& params, double max_norm) {
  const double norm = GradNorm(params);
  if (norm > max_norm && norm > 0.0) {
    const T scale = static_cast<T>(max_norm / norm);
    for (Param<T>* p : params) p->grad *= scale;
  }
  return norm;
}

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(std::vector<Param<T>*> params, AdamConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {
    for (Param<T>* p : params_) {
      m_.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void Step() {
    ++step_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T step_size = static_cast<T>(cfg_.lr / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    const T eps = static_cast<T>(cfg_.eps);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param<T>& p = *params_[i];
      m_[i] = b1 * m_[i] + (T(1) - b1) * p.grad;
      v_[i] = b2 * v_[i] + (T(1) - b2) * p.grad.cwiseAbs2();
      p.value.array() -=
          step_size * m_[i].array() / ((v_[i].array() * inv_c2).sqrt() + eps);
    }
  }

  void ZeroGrad() {
    for (Param<T>* p : params_) p->ZeroGrad();
  }

  const std::vector<Param<T>*>& params() const { return params_; }
  std::vector<Matrix<T>>& first_moments() { return m_; }
  std::vector<Matrix<T>>& second_moments() { return v_; }
  long long step_count() const { return step_; }
  void set_step_count(long long s) { step_ = s; }

 private:
  std::vector<Param<T>*> params_;
  AdamConfig cfg_;
  std::vector<Matrix<T>> m_, v_;
  long long step_ = 0;
};

}  // namespace fvae::nn

#endif  // FVAE_NN_OPTIM_HPP_
