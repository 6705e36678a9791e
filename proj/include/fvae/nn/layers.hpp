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

#ifndef FVAE_NN_LAYERS_HPP_
#define FVAE_NN_LAYERS_HPP_

// Primitive 1-D layers with hand-written backward passes. Each layer caches
// what its backward pass needs during Forward(); Backward() must follow the
// matching Forward() and accumulates parameter gradients.

#include <cmath>

#include "fvae/nn/tensor.hpp"
#include "fvae/random.hpp"

namespace fvae::nn {

template <typename T>
void InitUniform(Matrix<T>& m, double bound, Rng& rng) {
  for (long i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<T>(UniformReal(rng, -bound, bound));
}

// Conv1d(C_out, K, S) with zero "same" padding: T' = ceil(T / S), the padding
// split symmetrically (extra sample on the right).
template <typename T>
class Conv1d : public Module<T> {
 public:
  Conv1d(int in, int out, int kernel, int stride, Rng& rng)
      : in_(in), out_(out), kernel_(kernel), stride_(stride) {
    FVAE_CHECK(in >= 1 && out >= 1 && kernel >= 1 && stride >= 1,
               ErrorCode::kConfigError, "conv dims must be >= 1");
    weight_.name = "weight";
    bias_.name = "bias";
    weight_.value.resize(out, static_cast<long>(kernel) * in);
    bias_.value.resize(out, 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in) * kernel);
    InitUniform(weight_.value, bound, rng);
    InitUniform(bias_.value, bound, rng);
    weight_.ZeroGrad();
    bias_.ZeroGrad();
  }

  static int OutFrames(int frames, int stride) { return (frames + stride - 1) / stride; }
  int PadLeft(int frames) const {
    const int out = OutFrames(frames, stride_);
    const int total = std::max((out - 1) * stride_ + kernel_ - frames, 0);
    return total / 2;
  }

  Seq<T> Forward(const Seq<T>& x) {
    FVAE_CHECK(x.channels() == in_, ErrorCode::kShapeError,
               "conv input channels mismatch");
    in_frames_ = x.frames;
    batch_ = x.batch;
    const int out_frames = OutFrames(x.frames, stride_);
    const int left = PadLeft(x.frames);
    cols_.setZero(static_cast<long>(kernel_) * in_, static_cast<long>(x.batch) * out_frames);
    for (int b = 0; b < x.batch; ++b) {
      for (int t = 0; t < out_frames; ++t) {
        const long col = static_cast<long>(b) * out_frames + t;
        for (int k = 0; k < kernel_; ++k) {
          const int src = t * stride_ + k - left;
          if (src < 0 || src >= x.frames) continue;
          cols_.block(static_cast<long>(k) * in_, col, in_, 1) =
              x.data.col(static_cast<long>(b) * x.frames + src);
        }
      }
    }
    Seq<T> y;
    y.batch = x.batch;
    y.frames = out_frames;
    y.data.noalias() = weight_.value * cols_;
    y.data.colwise() += bias_.value.col(0);
    return y;
  }

  Seq<T> Backward(const Seq<T>& dy) {
    const int out_frames = OutFrames(in_frames_, stride_);
    FVAE_CHECK(dy.channels() == out_ && dy.frames == out_frames && dy.batch == batch_,
               ErrorCode::kShapeError, "conv backward shape mismatch");
    weight_.grad.noalias() += dy.data * cols_.transpose();
    bias_.grad.col(0) += dy.data.rowwise().sum();
    const Matrix<T> dcols = weight_.value.transpose() * dy.data;
    Seq<T> dx(in_, batch_, in_frames_);
    const int left = PadLeft(in_frames_);
    for (int b = 0; b < batch_; ++b) {
      for (int t = 0; t < out_frames; ++t) {
        const long col = static_cast<long>(b) * out_frames + t;
        for (int k = 0; k < kernel_; ++k) {
          const int src = t * stride_ + k - left;
          if (src < 0 || src >= in_frames_) continue;
          dx.data.col(static_cast<long>(b) * in_frames_ + src) +=
              dcols.block(static_cast<long>(k) * in_, col, in_, 1);
        }
      }
    }
    return dx;
  }

  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    weight_.name = JoinName(prefix, "weight");
    bias_.name = JoinName(prefix, "bias");
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return kernel_; }
  int stride() const { return stride_; }

 private:
  int in_, out_, kernel_, stride_;
  Param<T> weight_;  // [out x kernel*in], column k*in + c
  Param<T> bias_;    // [out x 1]
  Matrix<T> cols_;
  int in_frames_ = 0;
  int batch_ = 0;
};

// Transposed Conv1d without padding: T_out = (T - 1) * S + K.
template <typename T>
class ConvTranspose1d : public Module<T> {
 public:
  ConvTranspose1d(int in, int out, int kernel, int stride, Rng& rng)
      : in_(in), out_(out), kernel_(kernel), stride_(stride) {
    FVAE_CHECK(in >= 1 && out >= 1 && kernel >= 1 && stride >= 1,
               ErrorCode::kConfigError, "transposed conv dims must be >= 1");
    weight_.value.resize(static_cast<long>(kernel) * out, in);
    bias_.value.resize(out, 1);
    const double fan_in = static_cast<double>(in) * ((kernel + stride - 1) / stride);
    const double bound = 1.0 / std::sqrt(fan_in);
    InitUniform(weight_.value, bound, rng);
    InitUniform(bias_.value, bound, rng);
    weight_.ZeroGrad();
    bias_.ZeroGrad();
  }

  int OutFrames(int frames) const { return (frames - 1) * stride_ + kernel_; }

  Seq<T> Forward(const Seq<T>& x) {
    FVAE_CHECK(x.channels() == in_, ErrorCode::kShapeError,
               "transposed conv input channels mismatch");
    x_ = x;
    const int out_frames = OutFrames(x.frames);
    const Matrix<T> cols = weight_.value * x.data;
    Seq<T> y(out_, x.batch, out_frames);
    for (int b = 0; b < x.batch; ++b)
      for (int t = 0; t < x.frames; ++t)
        for (int k = 0; k < kernel_; ++k)
          y.data.col(static_cast<long>(b) * out_frames + t * stride_ + k) +=
              cols.block(static_cast<long>(k) * out_, static_cast<long>(b) * x.frames + t, out_, 1);
    y.data.colwise() += bias_.value.col(0);
    return y;
  }

  Seq<T> Backward(const Seq<T>& dy) {
    const int out_frames = OutFrames(x_.frames);
    FVAE_CHECK(dy.channels() == out_ && dy.frames == out_frames && dy.batch == x_.batch,
               ErrorCode::kShapeError, "transposed conv backward shape mismatch");
    Matrix<T> dcols(static_cast<long>(kernel_) * out_, x_.data.cols());
    for (int b = 0; b < x_.batch; ++b)
      for (int t = 0; t < x_.frames; ++t)
        for (int k = 0; k < kernel_; ++k)
          dcols.block(static_cast<long>(k) * out_, static_cast<long>(b) * x_.frames + t, out_, 1) =
              dy.data.col(static_cast<long>(b) * out_frames + t * stride_ + k);
    weight_.grad.noalias() += dcols * x_.data.transpose();
    bias_.grad.col(0) += dy.data.rowwise().sum();
    Seq<T> dx;
    dx.batch = x_.batch;
    dx.frames = x_.frames;
    dx.data.noalias() = weight_.value.transpose() * dcols;
    return dx;
  }

  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    weight_.name = JoinName(prefix, "weight");
    bias_.name = JoinName(prefix, "bias");
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  int in_, out_, kernel_, stride_;
  Param<T> weight_;  // [kernel*out x in], row block k holds tap k
  Param<T> bias_;
  Seq<T> x_;
};

// Batch normalisation over all (item, frame) columns, with running averages
// used in evaluation mode.
template <typename T>
class BatchNorm1d : public Module<T> {
 public:
  explicit BatchNorm1d(int channels, double momentum = 0.1, double eps = 1e-5)
      : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma_.value = Matrix<T>::Ones(channels, 1);
    beta_.value = Matrix<T>::Zero(channels, 1);
    running_mean_.value = Matrix<T>::Zero(channels, 1);
    running_var_.value = Matrix<T>::Ones(channels, 1);
    running_mean_.trainable = false;
    running_var_.trainable = false;
    gamma_.ZeroGrad();
    beta_.ZeroGrad();
  }

  Seq<T> Forward(const Seq<T>& x) {
    FVAE_CHECK(x.channels() == channels_, ErrorCode::kShapeError,
               "batch norm channel mismatch");
    batch_stats_ = this->training();
    const long n = x.data.cols();
    Vector<T> mean, var;
    if (batch_stats_) {
      mean = x.data.rowwise().mean();
      var = (x.data.colwise() - mean).array().square().rowwise().mean();
      const T unbias = n > 1 ? static_cast<T>(n) / static_cast<T>(n - 1) : T(1);
      const T m = static_cast<T>(momentum_);
      running_mean_.value.col(0) = (T(1) - m) * running_mean_.value.col(0) + m * mean;
      running_var_.value.col(0) =
          (T(1) - m) * running_var_.value.col(0) + m * unbias * var;
    } else {
      mean = running_mean_.value.col(0);
      var = running_var_.value.col(0);
    }
    inv_std_ = (var.array() + static_cast<T>(eps_)).rsqrt().matrix();
    Seq<T> y;
    y.batch = x.batch;
    y.frames = x.frames;
    xhat_ = (x.data.colwise() - mean).array().colwise() * inv_std_.array();
    y.data = (xhat_.array().colwise() * gamma_.value.col(0).array()).colwise() +
             beta_.value.col(0).array();
    return y;
  }

  Seq<T> Backward(const Seq<T>& dy) {
    gamma_.grad.col(0) += (dy.data.array() * xhat_.array()).rowwise().sum().matrix();
    beta_.grad.col(0) += dy.data.rowwise().sum();
    Seq<T> dx;
    dx.batch = dy.batch;
    dx.frames = dy.frames;
    const Matrix<T> dxhat = dy.data.array().colwise() * gamma_.value.col(0).array();
    if (!batch_stats_) {
      dx.data = dxhat.array().colwise() * inv_std_.array();
      return dx;
    }
    const T n = static_cast<T>(dy.data.cols());
    const Vector<T> sum_d = dxhat.rowwise().sum();
    const Vector<T> sum_dx = (dxhat.array() * xhat_.array()).rowwise().sum();
    dx.data = ((dxhat * n).colwise() - sum_d -
               Matrix<T>(xhat_.array().colwise() * sum_dx.array()))
                  .array()
                  .colwise() *
              (inv_std_.array() / n);
    return dx;
  }

  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    gamma_.name = JoinName(prefix, "gamma");
    beta_.name = JoinName(prefix, "beta");
    running_mean_.name = JoinName(prefix, "running_mean");
    running_var_.name = JoinName(prefix, "running_var");
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&running_mean_);
    out.push_back(&running_var_);
  }

  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }

 private:
  int channels_;
  double momentum_, eps_;
  Param<T> gamma_, beta_, running_mean_, running_var_;
  bool batch_stats_ = true;
  Matrix<T> xhat_;
  Vector<T> inv_std_;
};

// Instance normalisation: statistics per item and channel over time.
// Identical in training and evaluation.
template <typename T>
class InstanceNorm1d : public Module<T> {
 public:
  explicit InstanceNorm1d(int channels, double eps = 1e-5)
      : channels_(channels), eps_(eps) {
    gamma_.value = Matrix<T>::Ones(channels, 1);
    beta_.value = Matrix<T>::Zero(channels, 1);
    gamma_.ZeroGrad();
    beta_.ZeroGrad();
  }

  Seq<T> Forward(const Seq<T>& x) {
    FVAE_CHECK(x.channels() == channels_, ErrorCode::kShapeError,
               "instance norm channel mismatch");
    xhat_.resize(x.data.rows(), x.data.cols());
    inv_std_.resize(channels_, x.batch);
    Seq<T> y;
    y.batch = x.batch;
    y.frames = x.frames;
    y.data.resize(x.data.rows(), x.data.cols());
    for (int b = 0; b < x.batch; ++b) {
      const auto xb = x.item(b);
      const Vector<T> mean = xb.rowwise().mean();
      const Vector<T> var = (xb.colwise() - mean).array().square().rowwise().mean();
      inv_std_.col(b) = (var.array() + static_cast<T>(eps_)).rsqrt().matrix();
      auto xh = xhat_.middleCols(static_cast<long>(b) * x.frames, x.frames);
      xh = (xb.colwise() - mean).array().colwise() * inv_std_.col(b).array();
      y.item(b) = (xh.array().colwise() * gamma_.value.col(0).array()).colwise() +
                  beta_.value.col(0).array();
    }
    return y;
  }

  Seq<T> Backward(const Seq<T>& dy) {
    gamma_.grad.col(0) += (dy.data.array() * xhat_.array()).rowwise().sum().matrix();
    beta_.grad.col(0) += dy.data.rowwise().sum();
    Seq<T> dx;
    dx.batch = dy.batch;
    dx.frames = dy.frames;
    dx.data.resize(dy.data.rows(), dy.data.cols());
    const T n = static_cast<T>(dy.frames);
    for (int b = 0; b < dy.batch; ++b) {
      const Matrix<T> dxhat = dy.item(b).array().colwise() * gamma_.value.col(0).array();
      const auto xh = xhat_.middleCols(static_cast<long>(b) * dy.frames, dy.frames);
      const Vector<T> sum_d = dxhat.rowwise().sum();
      const Vector<T> sum_dx = (dxhat.array() * xh.array()).rowwise().sum();
      dx.item(b) = ((dxhat * n).colwise() - sum_d -
                    Matrix<T>(xh.array().colwise() * sum_dx.array()))
                       .array()
                       .colwise() *
                   (inv_std_.col(b).array() / n);
    }
    return dx;
  }

  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    gamma_.name = JoinName(prefix, "gamma");
    beta_.name = JoinName(prefix, "beta");
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }

 private:
  int channels_;
  double eps_;
  Param<T> gamma_, beta_;
  Matrix<T> xhat_;
  Matrix<T> inv_std_;  // [channels x batch]
};

template <typename T>
class Relu {
 public:
  Seq<T> Forward(const Seq<T>& x) {
    mask_ = (x.data.array() > T(0)).template cast<T>();
    Seq<T> y;
    y.batch = x.batch;
    y.frames = x.frames;
    y.data = x.data.cwiseMax(T(0));
    return y;
  }
  Seq<T> Backward(const Seq<T>& dy) {
    Seq<T> dx;
    dx.batch = dy.batch;
    dx.frames = dy.frames;
    dx.data = dy.data.cwiseProduct(mask_);
    return dx;
  }

 private:
  Matrix<T> mask_;
};

}  // namespace fvae::nn

#endif  // FVAE_NN_LAYERS_HPP_
