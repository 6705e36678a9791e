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

#ifndef FVAE_MODEL_HPP_
#define FVAE_MODEL_HPP_

// Factorized VAE: a content encoder producing a per-frame Gaussian posterior,
// a speaker encoder producing one pooled embedding per utterance, and a
// decoder fed with [s ... s; z_1 ... z_T'].

#include <cstdint>
#include <string>
#include <vector>

#include "fvae/features.hpp"
#include "fvae/nn/blocks.hpp"

namespace fvae {

struct ModelConfig {
  int n_mels = 80;         // F
  int content_dim = 32;    // D_z
  int speaker_dim = 128;   // D_s
  int downsample = 1;      // S_ds
  double beta = 1e-3;
  int hidden = 512;
  int hidden_kernel = 5;
  int n_resblocks = 3;
  nn::NormKind content_norm = nn::NormKind::kInstance;
  nn::NormKind speaker_norm = nn::NormKind::kBatch;
  nn::NormKind decoder_norm = nn::NormKind::kBatch;
  double log_var_min = -14.0;
  double log_var_max = 14.0;
  std::uint64_t init_seed = 0;

  void Validate() const;
  std::string ToJson() const;
  static ModelConfig FromJson(const std::string& text);
  // FNV-1a over the canonical JSON; stored in checkpoint headers.
  std::uint64_t Hash() const;
};

const char* NormKindName(nn::NormKind k);
nn::NormKind ParseNormKind(const std::string& s);

enum class ForwardMode { kTrain, kTest };

template <typename T>
struct Posterior {
  nn::Seq<T> mu;       // [D_z x B*T']
  nn::Seq<T> log_var;  // clamped to [log_var_min, log_var_max]
};

struct ContentPosterior {
  Eigen::MatrixXf mu;       // [D_z x T']
  Eigen::MatrixXf log_var;  // [D_z x T']
};

struct SpeakerEmbedding {
  Eigen::VectorXf s;  // [D_s]
};

struct VaeOutput {
  MelSpectrogram reconstruction;
  ContentPosterior posterior;
  Eigen::MatrixXf z_sample;
  SpeakerEmbedding speaker;
};

template <typename T>
class FactorizedVae {
 public:
  FactorizedVae(const ModelConfig& cfg, Rng& rng)
      : cfg_(Validated(cfg)),
        content_(cfg.n_mels, ContentEncConfig(cfg), rng),
        speaker_(cfg.n_mels, SpeakerEncConfig(cfg), rng),
        decoder_(cfg.content_dim + cfg.speaker_dim, DecoderConfig(cfg), rng) {}

  static nn::EncConfig ContentEncConfig(const ModelConfig& c) {
    return {c.hidden, c.hidden_kernel, c.n_resblocks, 2 * c.content_dim,
            c.downsample, c.downsample, c.content_norm};
  }
  static nn::EncConfig SpeakerEncConfig(const ModelConfig& c) {
    return {c.hidden, c.hidden_kernel, c.n_resblocks, c.speaker_dim, 1, 1, c.speaker_norm};
  }
  static nn::DecConfig DecoderConfig(const ModelConfig& c) {
    return {c.hidden, c.hidden_kernel, c.n_resblocks, c.n_mels,
            c.downsample, c.downsample, c.decoder_norm};
  }

  // x: instance-normalised content input [F x B*T].
  Posterior<T> EncodeContent(const nn::Seq<T>& x) {
    const nn::Seq<T> out = content_.Forward(x);
    const int dz = cfg_.content_dim;
    Posterior<T> p;
    p.mu = nn::Seq<T>(out.data.topRows(dz), out.batch, out.frames);
    const nn::Matrix<T> raw = out.data.bottomRows(dz);
    const T lo = static_cast<T>(cfg_.log_var_min), hi = static_cast<T>(cfg_.log_var_max);
    p.log_var = nn::Seq<T>(raw.cwiseMax(lo).cwiseMin(hi), out.batch, out.frames);
    clamp_mask_ = ((raw.array() >= lo) && (raw.array() <= hi)).template cast<T>();
    return p;
  }

  nn::Seq<T> BackwardContent(const nn::Seq<T>& d_mu, const nn::Seq<T>& d_log_var) {
    nn::Seq<T> d(2 * cfg_.content_dim, d_mu.batch, d_mu.frames);
    d.data.topRows(cfg_.content_dim) = d_mu.data;
    d.data.bottomRows(cfg_.content_dim) = d_log_var.data.cwiseProduct(clamp_mask_);
    return content_.Backward(d);
  }

  // Temporal mean of the speaker encoder output: [D_s x B], one frame each.
  nn::Seq<T> EncodeSpeaker(const nn::Seq<T>& x) {
    const nn::Seq<T> out = speaker_.Forward(x);
    speaker_frames_ = out.frames;
    nn::Seq<T> s(cfg_.speaker_dim, out.batch, 1);
    for (int b = 0; b < out.batch; ++b) s.data.col(b) = out.item(b).rowwise().mean();
    return s;
  }

  nn::Seq<T> BackwardSpeaker(const nn::Seq<T>& ds) {
    nn::Seq<T> d(cfg_.speaker_dim, ds.batch, speaker_frames_);
    const T inv = T(1) / static_cast<T>(speaker_frames_);
    for (int b = 0; b < ds.batch; ++b) d.item(b).colwise() = ds.data.col(b) * inv;
    return speaker_.Backward(d);
  }

  static nn::Seq<T> Reparameterize(const Posterior<T>& p, ForwardMode mode, Rng& rng,
                                   nn::Matrix<T>* noise_out = nullptr) {
    if (mode == ForwardMode::kTest) return p.mu;
    nn::Matrix<T> eps(p.mu.data.rows(), p.mu.data.cols());
    for (long i = 0; i < eps.size(); ++i) eps.data()[i] = static_cast<T>(StandardNormal(rng));
    nn::Seq<T> z(p.mu.data + ((p.log_var.data.array() * T(0.5)).exp() * eps.array()).matrix(),
                 p.mu.batch, p.mu.frames);
    if (noise_out) *noise_out = std::move(eps);
    return z;
  }

  // Gradient of z = mu + exp(log_var / 2) * eps with respect to (mu, log_var).
  static void ReparameterizeBackward(const Posterior<T>& p, const nn::Matrix<T>& eps,
                                     const nn::Seq<T>& dz, nn::Seq<T>& d_mu,
                                     nn::Seq<T>& d_log_var) {
    d_mu.data += dz.data;
    d_log_var.data.array() +=
        dz.data.array() * eps.array() * (p.log_var.data.array() * T(0.5)).exp() * T(0.5);
  }

  // z: [D_z x B*T'], s: [D_s x B]; output trimmed to target_frames.
  nn::Seq<T> Decode(const nn::Seq<T>& z, const nn::Seq<T>& s, int target_frames) {
    FVAE_CHECK(z.channels() == cfg_.content_dim && s.channels() == cfg_.speaker_dim &&
                   s.batch == z.batch,
               ErrorCode::kShapeError, "decoder input shape mismatch");
    nn::Seq<T> in(cfg_.content_dim + cfg_.speaker_dim, z.batch, z.frames);
    for (int b = 0; b < z.batch; ++b) {
      in.item(b).topRows(cfg_.speaker_dim).colwise() = s.data.col(b);
      in.item(b).bottomRows(cfg_.content_dim) = z.item(b);
    }
    const nn::Seq<T> out = decoder_.Forward(in);
    FVAE_CHECK(out.frames >= target_frames, ErrorCode::kShapeError,
               "decoder output shorter than target");
    decoded_frames_ = out.frames;
    return nn::TrimFrames(out, target_frames);
  }

  // Returns {dz, ds}.
  std::pair<nn::Seq<T>, nn::Seq<T>> BackwardDecode(const nn::Seq<T>& dxhat) {
    const nn::Seq<T> din = decoder_.Backward(nn::PadFrames(dxhat, decoded_frames_));
    nn::Seq<T> dz(cfg_.content_dim, din.batch, din.frames);
    nn::Seq<T> ds(cfg_.speaker_dim, din.batch, 1);
    for (int b = 0; b < din.batch; ++b) {
      ds.data.col(b) = din.item(b).topRows(cfg_.speaker_dim).rowwise().sum();
      dz.item(b) = din.item(b).bottomRows(cfg_.content_dim);
    }
    return {std::move(dz), std::move(ds)};
  }

  void SetTraining(bool training) {
    content_.SetTraining(training);
    speaker_.SetTraining(training);
    decoder_.SetTraining(training);
  }

  std::vector<nn::Param<T>*> ContentParams() { return content_.Parameters("content_encoder"); }
  std::vector<nn::Param<T>*> SpeakerParams() { return speaker_.Parameters("speaker_encoder"); }
  std::vector<nn::Param<T>*> DecoderParams() { return decoder_.Parameters("decoder"); }
  std::vector<nn::Param<T>*> Parameters() {
    std::vector<nn::Param<T>*> all = ContentParams();
    for (auto* p : SpeakerParams()) all.push_back(p);
    for (auto* p : DecoderParams()) all.push_back(p);
    return all;
  }
  // Parameters plus running statistics, keyed by module path.
  std::vector<nn::Param<T>*> State() {
    std::vector<nn::Param<T>*> all = content_.State("content_encoder");
    for (auto* p : speaker_.State("speaker_encoder")) all.push_back(p);
    for (auto* p : decoder_.State("decoder")) all.push_back(p);
    return all;
  }
  void ZeroGrad() {
    for (auto* p : Parameters()) p->ZeroGrad();
  }

  const ModelConfig& config() const { return cfg_; }
  nn::Encoder<T>& content_encoder() { return content_; }
  nn::Encoder<T>& speaker_encoder() { return speaker_; }
  nn::Decoder<T>& decoder() { return decoder_; }

  // ---- Single-utterance helpers (evaluation mode is the caller's choice).

  ContentPosterior EncodeContent(const MelSpectrogram& x) {
    FVAE_CHECK(x.norm_state == NormState::kInstance, ErrorCode::kConfigError,
               "content encoder expects an instance-normalised input");
    const Posterior<T> p = EncodeContent(FromMel(x));
    return {p.mu.data.template cast<float>(), p.log_var.data.template cast<float>()};
  }

  SpeakerEmbedding EncodeSpeaker(const MelSpectrogram& x) {
    FVAE_CHECK(x.norm_state == NormState::kGlobal, ErrorCode::kConfigError,
               "speaker encoder expects a globally normalised input");
    return {EncodeSpeaker(FromMel(x)).data.col(0).template cast<float>()};
  }

  MelSpectrogram Decode(const Eigen::MatrixXf& z, const SpeakerEmbedding& s, int target_frames) {
    nn::Seq<T> zs(z.cast<T>(), 1, static_cast<int>(z.cols()));
    nn::Seq<T> ss(s.s.cast<T>(), 1, 1);
    MelSpectrogram out;
    out.values = Decode(zs, ss, target_frames).data.template cast<float>();
    out.norm_state = NormState::kGlobal;
    return out;
  }

  // Test-mode conversion: content of `source`, speaker of `target`. Both
  // inputs are globally normalised.
  MelSpectrogram Convert(const MelSpectrogram& source, const MelSpectrogram& target) {
    FVAE_CHECK(source.norm_state == NormState::kGlobal &&
                   target.norm_state == NormState::kGlobal,
               ErrorCode::kConfigError, "conversion expects globally normalised inputs");
    SetTraining(false);
    const ContentPosterior p = EncodeContent(InstanceNormalize(source));
    return Decode(p.mu, EncodeSpeaker(target), source.frames());
  }

  MelSpectrogram ConvertWithSpeaker(const MelSpectrogram& source, const SpeakerEmbedding& s) {
    SetTraining(false);
    const ContentPosterior p = EncodeContent(InstanceNormalize(source));
    return Decode(p.mu, s, source.frames());
  }

  // Full autoencoding pass for one utterance: X1 (global) is the target,
  // the content input is its instance normalisation, X2 = `speaker_input`.
  VaeOutput Run(const MelSpectrogram& x1, const MelSpectrogram& speaker_input,
                ForwardMode mode, Rng& rng) {
    const Posterior<T> p = EncodeContent(FromMel(InstanceNormalize(x1)));
    const nn::Seq<T> z = Reparameterize(p, mode, rng);
    const nn::Seq<T> s = EncodeSpeaker(FromMel(speaker_input));
    VaeOutput out;
    out.reconstruction.values = Decode(z, s, x1.frames()).data.template cast<float>();
    out.reconstruction.norm_state = NormState::kGlobal;
    out.posterior = {p.mu.data.template cast<float>(), p.log_var.data.template cast<float>()};
    out.z_sample = z.data.template cast<float>();
    out.speaker.s = s.data.col(0).template cast<float>();
    return out;
  }

  static nn::Seq<T> FromMel(const MelSpectrogram& x) {
    return nn::Seq<T>(x.values.cast<T>(), 1, x.frames());
  }

 private:
  static const ModelConfig& Validated(const ModelConfig& c) {
    c.Validate();
    return c;
  }

  ModelConfig cfg_;
  nn::Encoder<T> content_;
  nn::Encoder<T> speaker_;
  nn::Decoder<T> decoder_;
  nn::Matrix<T> clamp_mask_;
  int speaker_frames_ = 0;
  int decoded_frames_ = 0;
};

}  // namespace fvae

#endif  // FVAE_MODEL_HPP_
