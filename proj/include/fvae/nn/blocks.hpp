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

#ifndef FVAE_NN_BLOCKS_HPP_
#define FVAE_NN_BLOCKS_HPP_

// ConvBlock = Norm -> ReLU -> Conv1d, ResBlock = x + ConvBlock(ConvBlock(x)),
// and the Enc / Dec archetypes built from them.

#include <memory>
#include <optional>
#include <vector>

#include "fvae/nn/layers.hpp"

namespace fvae::nn {

template <typename T>
class Norm : public Module<T> {
 public:
  Norm(NormKind kind, int channels) : kind_(kind) {
    if (kind == NormKind::kBatch) batch_ = std::make_unique<BatchNorm1d<T>>(channels);
    if (kind == NormKind::kInstance)
      instance_ = std::make_unique<InstanceNorm1d<T>>(channels);
  }

  Seq<T> Forward(const Seq<T>& x) {
    if (batch_) return batch_->Forward(x);
    if (instance_) return instance_->Forward(x);
    return x;
  }
  Seq<T> Backward(const Seq<T>& dy) {
    if (batch_) return batch_->Backward(dy);
    if (instance_) return instance_->Backward(dy);
    return dy;
  }
  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    if (batch_) batch_->Collect(prefix, out);
    if (instance_) instance_->Collect(prefix, out);
  }
  void SetTraining(bool training) override {
    Module<T>::SetTraining(training);
    if (batch_) batch_->SetTraining(training);
  }
  NormKind kind() const { return kind_; }

 private:
  NormKind kind_;
  std::unique_ptr<BatchNorm1d<T>> batch_;
  std::unique_ptr<InstanceNorm1d<T>> instance_;
};

struct ConvSpec {
  int channels = 1;
  int kernel = 1;
  int stride = 1;
  bool transposed = false;
  NormKind norm = NormKind::kBatch;
};

template <typename T>
class ConvBlock : public Module<T> {
 public:
  ConvBlock(int in, const ConvSpec& spec, Rng& rng)
      : norm_(spec.norm, in), conv_(in, spec.channels, spec.kernel, spec.stride, rng) {
    FVAE_CHECK(!spec.transposed, ErrorCode::kConfigError,
               "ConvBlock uses a regular convolution");
  }

  Seq<T> Forward(const Seq<T>& x) { return conv_.Forward(relu_.Forward(norm_.Forward(x))); }
  Seq<T> Backward(const Seq<T>& dy) {
    return norm_.Backward(relu_.Backward(conv_.Backward(dy)));
  }
  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    norm_.Collect(JoinName(prefix, "norm"), out);
    conv_.Collect(JoinName(prefix, "conv"), out);
  }
  void SetTraining(bool training) override {
    Module<T>::SetTraining(training);
    norm_.SetTraining(training);
  }
  Conv1d<T>& conv() { return conv_; }
  Norm<T>& norm() { return norm_; }

 private:
  Norm<T> norm_;
  Relu<T> relu_;
  Conv1d<T> conv_;
};

template <typename T>
class ResBlock : public Module<T> {
 public:
  ResBlock(int in, const ConvSpec& spec, Rng& rng)
      : first_(Checked(in, spec), spec, rng),
        second_(spec.channels, {spec.channels, spec.kernel, 1, false, spec.norm}, rng) {}

  Seq<T> Forward(const Seq<T>& x) {
    Seq<T> y = second_.Forward(first_.Forward(x));
    y.data += x.data;
    return y;
  }
  Seq<T> Backward(const Seq<T>& dy) {
    Seq<T> dx = first_.Backward(second_.Backward(dy));
    dx.data += dy.data;
    return dx;
  }
  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    first_.Collect(JoinName(prefix, "block1"), out);
    second_.Collect(JoinName(prefix, "block2"), out);
  }
  void SetTraining(bool training) override {
    Module<T>::SetTraining(training);
    first_.SetTraining(training);
    second_.SetTraining(training);
  }
  ConvBlock<T>& first() { return first_; }
  ConvBlock<T>& second() { return second_; }

 private:
  static int Checked(int in, const ConvSpec& spec) {
    FVAE_CHECK(spec.stride == 1 && in == spec.channels && !spec.transposed,
               ErrorCode::kConfigError,
               "ResBlock skip path needs stride 1 and C_in == C");
    return in;
  }

  ConvBlock<T> first_;
  ConvBlock<T> second_;
};

struct EncConfig {
  int hidden = 512;
  int hidden_kernel = 5;
  int n_resblocks = 3;
  int out_dim = 64;
  int out_kernel = 1;  // K_o
  int out_stride = 1;  // S_o
  NormKind norm = NormKind::kBatch;
};

struct DecConfig {
  int hidden = 512;
  int hidden_kernel = 5;
  int n_resblocks = 3;
  int out_dim = 80;
  int in_kernel = 1;  // K_i
  int in_stride = 1;  // S_i
  NormKind norm = NormKind::kBatch;
};

// Conv1d(hidden, K, 1) -> n x ResBlock(hidden, K, 1) -> ConvBlock(D, K_o, S_o).
template <typename T>
class Encoder : public Module<T> {
 public:
  Encoder(int in_channels, const EncConfig& cfg, Rng& rng)
      : cfg_(cfg), input_(in_channels, cfg.hidden, cfg.hidden_kernel, 1, rng) {
    for (int i = 0; i < cfg.n_resblocks; ++i)
      res_.push_back(std::make_unique<ResBlock<T>>(
          cfg.hidden, ConvSpec{cfg.hidden, cfg.hidden_kernel, 1, false, cfg.norm}, rng));
    output_ = std::make_unique<ConvBlock<T>>(
        cfg.hidden, ConvSpec{cfg.out_dim, cfg.out_kernel, cfg.out_stride, false, cfg.norm},
        rng);
  }

  Seq<T> Forward(const Seq<T>& x) {
    Seq<T> h = input_.Forward(x);
    for (auto& r : res_) h = r->Forward(h);
    return output_->Forward(h);
  }
  Seq<T> Backward(const Seq<T>& dy) {
    Seq<T> d = output_->Backward(dy);
    for (auto it = res_.rbegin(); it != res_.rend(); ++it) d = (*it)->Backward(d);
    return input_.Backward(d);
  }
  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    input_.Collect(JoinName(prefix, "input"), out);
    for (std::size_t i = 0; i < res_.size(); ++i)
      res_[i]->Collect(JoinName(prefix, "res" + std::to_string(i)), out);
    output_->Collect(JoinName(prefix, "output"), out);
  }
  void SetTraining(bool training) override {
    Module<T>::SetTraining(training);
    for (auto& r : res_) r->SetTraining(training);
    output_->SetTraining(training);
  }

  int OutFrames(int frames) const { return Conv1d<T>::OutFrames(frames, cfg_.out_stride); }
  const EncConfig& config() const { return cfg_; }
  // Receptive field in input frames of one output frame (stride-1 stack).
  int ReceptiveField() const {
    return cfg_.hidden_kernel + 2 * cfg_.n_resblocks * (cfg_.hidden_kernel - 1) +
           (cfg_.out_kernel - 1);
  }

 private:
  EncConfig cfg_;
  Conv1d<T> input_;
  std::vector<std::unique_ptr<ResBlock<T>>> res_;
  std::unique_ptr<ConvBlock<T>> output_;
};

// ConvT(hidden, K_i, S_i) -> n x ResBlock(hidden, K, 1) -> ConvBlock(F, K, 1).
// The output is the final convolution, without activation.
template <typename T>
class Decoder : public Module<T> {
 public:
  Decoder(int in_channels, const DecConfig& cfg, Rng& rng)
      : cfg_(cfg), input_(in_channels, cfg.hidden, cfg.in_kernel, cfg.in_stride, rng) {
    for (int i = 0; i < cfg.n_resblocks; ++i)
      res_.push_back(std::make_unique<ResBlock<T>>(
          cfg.hidden, ConvSpec{cfg.hidden, cfg.hidden_kernel, 1, false, cfg.norm}, rng));
    output_ = std::make_unique<ConvBlock<T>>(
        cfg.hidden, ConvSpec{cfg.out_dim, cfg.hidden_kernel, 1, false, cfg.norm}, rng);
  }

  Seq<T> Forward(const Seq<T>& x) {
    Seq<T> h = input_.Forward(x);
    for (auto& r : res_) h = r->Forward(h);
    return output_->Forward(h);
  }
  Seq<T> Backward(const Seq<T>& dy) {
    Seq<T> d = output_->Backward(dy);
    for (auto it = res_.rbegin(); it != res_.rend(); ++it) d = (*it)->Backward(d);
    return input_.Backward(d);
  }
  void Collect(const std::string& prefix, std::vector<Param<T>*>& out) override {
    input_.Collect(JoinName(prefix, "input"), out);
    for (std::size_t i = 0; i < res_.size(); ++i)
      res_[i]->Collect(JoinName(prefix, "res" + std::to_string(i)), out);
    output_->Collect(JoinName(prefix, "output"), out);
  }
  void SetTraining(bool training) override {
    Module<T>::SetTraining(training);
    for (auto& r : res_) r->SetTraining(training);
    output_->SetTraining(training);
  }

  int OutFrames(int frames) const { return input_.OutFrames(frames); }
  const DecConfig& config() const { return cfg_; }

 private:
  DecConfig cfg_;
  ConvTranspose1d<T> input_;
  std::vector<std::unique_ptr<ResBlock<T>>> res_;
  std::unique_ptr<ConvBlock<T>> output_;
};

// Keeps the first `frames` frames of every item.
template <typename T>
Seq<T> TrimFrames(const Seq<T>& x, int frames) {
  FVAE_CHECK(frames <= x.frames, ErrorCode::kShapeError, "cannot trim to more frames");
  if (frames == x.frames) return x;
  Seq<T> y(x.channels(), x.batch, frames);
  for (int b = 0; b < x.batch; ++b) y.item(b) = x.item(b).leftCols(frames);
  return y;
}

// Adjoint of TrimFrames: zero-pads every item back to `frames`.
template <typename T>
Seq<T> PadFrames(const Seq<T>& x, int frames) {
  if (frames == x.frames) return x;
  Seq<T> y(x.channels(), x.batch, frames);
  for (int b = 0; b < x.batch; ++b) y.item(b).leftCols(x.frames) = x.item(b);
  return y;
}

}  // namespace fvae::nn

#endif  // FVAE_NN_BLOCKS_HPP_
