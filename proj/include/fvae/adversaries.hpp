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

#ifndef FVAE_ADVERSARIES_HPP_
#define FVAE_ADVERSARIES_HPP_

// Adversarial networks over content-embedding means: a frame-rate speaker
// classifier and a CPC encoder with identity prediction head.

#include <string>
#include <vector>

#include "fvae/nn/blocks.hpp"
#include "fvae/nn/optim.hpp"
#include "fvae/objectives.hpp"

namespace fvae {

enum class AdversaryKind { kSpeakerClassifier, kCpc };

const char* AdversaryKindName(AdversaryKind k);
AdversaryKind ParseAdversaryKind(const std::string& s);

struct AdversaryConfig {
  AdversaryKind kind = AdversaryKind::kCpc;
  int n_speakers = 0;   // D_y, classifier only
  int cpc_dim = 256;    // D_h
  int cpc_steps = 100;  // n
  int input_dim = 32;   // D_z
  int hidden = 512;
  int hidden_kernel = 5;
  int n_resblocks = 3;
  nn::NormKind norm = nn::NormKind::kBatch;

  void Validate() const;
  int out_dim() const { return kind == AdversaryKind::kCpc ? cpc_dim : n_speakers; }
};

template <typename T>
struct AdversaryResult {
  double loss = 0.0;
  nn::Seq<T> d_input;  // dL_adv / d mu
};

template <typename T>
class Adversary {
 public:
  Adversary(const AdversaryConfig& cfg, Rng& rng)
      : cfg_(Validated(cfg)),
        net_(cfg.input_dim,
             nn::EncConfig{cfg.hidden, cfg.hidden_kernel, cfg.n_resblocks, cfg.out_dim(), 1, 1,
                           cfg.norm},
             rng) {}

  // Speaker logits [n_spk x T'] or CPC embeddings [D_h x T'].
  nn::Seq<T> Forward(const nn::Seq<T>& mu) {
    FVAE_CHECK(mu.channels() == cfg_.input_dim, ErrorCode::kShapeError,
               "adversary input has " + std::to_string(mu.channels()) + " channels, expected " +
                   std::to_string(cfg_.input_dim));
    return net_.Forward(mu);
  }

  nn::Seq<T> ClassifySpeaker(const nn::Seq<T>& mu) {
    FVAE_CHECK(cfg_.kind == AdversaryKind::kSpeakerClassifier, ErrorCode::kConfigError,
               "adversary is not a speaker classifier");
    return Forward(mu);
  }

  nn::Seq<T> CpcEmbed(const nn::Seq<T>& mu) {
    FVAE_CHECK(cfg_.kind == AdversaryKind::kCpc, ErrorCode::kConfigError,
               "adversary is not a CPC encoder");
    return Forward(mu);
  }

  // Loss value only.
  double Loss(const nn::Seq<T>& mu, const std::vector<int>* speakers,
              Reduction r = Reduction::kMeanOverBatch) {
    return LossFromOutput(Forward(mu), speakers, r).value;
  }

  // Forward, loss and backward. Parameter gradients accumulate into the
  // adversary; the returned d_input is dL_adv / d mu.
  AdversaryResult<T> LossAndBackward(const nn::Seq<T>& mu, const std::vector<int>* speakers,
                                     Reduction r = Reduction::kMeanOverBatch) {
    const nn::Seq<T> out = Forward(mu);
    LossGrad<T> lg = LossFromOutput(out, speakers, r);
    AdversaryResult<T> res;
    res.loss = lg.value;
    res.d_input = net_.Backward(nn::Seq<T>(std::move(lg.grad), out.batch, out.frames));
    return res;
  }

  void SetTraining(bool training) { net_.SetTraining(training); }
  std::vector<nn::Param<T>*> Parameters() { return net_.Parameters("adversary"); }
  std::vector<nn::Param<T>*> State() { return net_.State("adversary"); }
  void ZeroGrad() {
    for (auto* p : Parameters()) p->ZeroGrad();
  }
  const AdversaryConfig& config() const { return cfg_; }
  nn::Encoder<T>& network() { return net_; }

 private:
  static const AdversaryConfig& Validated(const AdversaryConfig& c) {
    c.Validate();
    return c;
  }

  LossGrad<T> LossFromOutput(const nn::Seq<T>& out, const std::vector<int>* speakers,
                             Reduction r) {
    if (cfg_.kind == AdversaryKind::kCpc) return CpcLoss(out, cfg_.cpc_steps, r);
    FVAE_CHECK(speakers != nullptr, ErrorCode::kLabelError,
               "speaker classifier adversary needs speaker labels");
    return SpeakerClassifierLoss(out, *speakers, ClassifierInput::kLogits, r);
  }

  AdversaryConfig cfg_;
  nn::Encoder<T> net_;
};

// One optimizer step on the adversary alone; `mu` is a detached copy of the
// content means, so nothing flows back into the VAE. Returns the loss
// before the update.
template <typename T>
double AdversaryStep(Adversary<T>& adversary, nn::Adam<T>& optimizer, const nn::Seq<T>& mu,
                     const std::vector<int>* speakers, double clip_norm,
                     Reduction r = Reduction::kMeanOverBatch) {
  adversary.ZeroGrad();
  const double loss = adversary.LossAndBackward(mu, speakers, r).loss;
  FVAE_CHECK(std::isfinite(loss), ErrorCode::kNumericalError,
             "non-finite adversary loss");
  if (clip_norm > 0.0) nn::ClipGradNorm(adversary.Parameters(), clip_norm);
  optimizer.Step();
  return loss;
}

}  // namespace fvae

#endif  // FVAE_ADVERSARIES_HPP_
