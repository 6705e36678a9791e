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

#ifndef FVAE_OBJECTIVES_HPP_
#define FVAE_OBJECTIVES_HPP_

// Scalar training objectives with their gradients. Every loss sums over
// time and feature dimensions; the batch reduction is a single switch.

#include <cmath>
#include <limits>
#include <vector>

#include "fvae/nn/tensor.hpp"

namespace fvae {

enum class Reduction { kMeanOverBatch, kSum };

template <typename T>
struct LossGrad {
  double value = 0.0;
  nn::Matrix<T> grad;  // d value / d input, shaped like the input
};

template <typename T>
struct KlGrad {
  double value = 0.0;
  nn::Matrix<T> d_mu;
  nn::Matrix<T> d_log_var;
};

inline double BatchDivisor(int batch, Reduction r) {
  return r == Reduction::kMeanOverBatch ? static_cast<double>(batch) : 1.0;
}

// Squared error summed over bands and frames.
template <typename T>
LossGrad<T> ReconstructionLoss(const nn::Seq<T>& xhat, const nn::Seq<T>& x,
                               Reduction r = Reduction::kMeanOverBatch) {
  FVAE_CHECK(xhat.data.rows() == x.data.rows() && xhat.data.cols() == x.data.cols() &&
                 xhat.batch == x.batch,
             ErrorCode::kShapeError, "reconstruction shape mismatch");
  const double div = BatchDivisor(x.batch, r);
  const nn::Matrix<T> diff = xhat.data - x.data;
  LossGrad<T> out;
  out.value = diff.template cast<double>().squaredNorm() / div;
  out.grad = diff * static_cast<T>(2.0 / div);
  return out;
}

// KL(N(mu, exp(log_var)) || N(0, I)) summed over frames and dimensions.
template <typename T>
KlGrad<T> KlLoss(const nn::Seq<T>& mu, const nn::Seq<T>& log_var,
                 Reduction r = Reduction::kMeanOverBatch) {
  FVAE_CHECK(mu.data.rows() == log_var.data.rows() && mu.data.cols() == log_var.data.cols(),
             ErrorCode::kShapeError, "posterior shape mismatch");
  const double div = BatchDivisor(mu.batch, r);
  const auto m = mu.data.template cast<double>().array();
  const auto lv = log_var.data.template cast<double>().array();
  KlGrad<T> out;
  out.value = 0.5 * (m.square() + lv.exp() - lv - 1.0).sum() / div;
  out.d_mu = mu.data * static_cast<T>(1.0 / div);
  out.d_log_var = ((log_var.data.array().exp() - T(1)) * static_cast<T>(0.5 / div)).matrix();
  return out;
}

enum class ClassifierInput { kLogits, kProbabilities };

// Cross entropy per frame, summed over frames. `labels` holds one entry per
// column of `scores`; negative labels are ignored.
template <typename T>
LossGrad<T> FrameCrossEntropy(const nn::Seq<T>& scores, const std::vector<int>& labels,
                              ClassifierInput input = ClassifierInput::kLogits,
                              Reduction r = Reduction::kMeanOverBatch) {
  FVAE_CHECK(static_cast<long>(labels.size()) == scores.data.cols(),
             ErrorCode::kShapeError, "one label per frame required");
  const int classes = scores.channels();
  const double div = BatchDivisor(scores.batch, r);
  LossGrad<T> out;
  out.grad = nn::Matrix<T>::Zero(scores.data.rows(), scores.data.cols());
  double total = 0.0;
  for (long c = 0; c < scores.data.cols(); ++c) {
    const int y = labels[c];
    if (y < 0) continue;
    FVAE_CHECK(y < classes, ErrorCode::kLabelError,
               "label " + std::to_string(y) + " outside [0, " +
                   std::to_string(classes) + ")");
    if (input == ClassifierInput::kLogits) {
      const Eigen::VectorXd z = scores.data.col(c).template cast<double>();
      const double zmax = z.maxCoeff();
      const Eigen::VectorXd e = (z.array() - zmax).exp();
      const double sum = e.sum();
      total += zmax + std::log(sum) - z[y];
      Eigen::VectorXd g = e / sum;
      g[y] -= 1.0;
      out.grad.col(c) = (g / div).template cast<T>();
    } else {
      const double p = static_cast<double>(scores.data(y, c));
      total += p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
      out.grad(y, c) = static_cast<T>(-1.0 / (p * div));
    }
  }
  out.value = total / div;
  return out;
}

// Adversarial speaker classifier objective: every frame of item b carries
// the utterance-level speaker id speakers[b].
template <typename T>
LossGrad<T> SpeakerClassifierLoss(const nn::Seq<T>& scores, const std::vector<int>& speakers,
                                  ClassifierInput input = ClassifierInput::kLogits,
                                  Reduction r = Reduction::kMeanOverBatch) {
  FVAE_CHECK(static_cast<int>(speakers.size()) == scores.batch, ErrorCode::kLabelError,
             "one speaker id per batch item required");
  std::vector<int> frame_labels(scores.data.cols());
  for (int b = 0; b < scores.batch; ++b) {
    FVAE_CHECK(speakers[b] >= 0 && speakers[b] < scores.channels(), ErrorCode::kLabelError,
               "invalid speaker id " + std::to_string(speakers[b]));
    for (int t = 0; t < scores.frames; ++t)
      frame_labels[static_cast<long>(b) * scores.frames + t] = speakers[b];
  }
  return FrameCrossEntropy(scores, frame_labels, input, r);
}

// InfoNCE with identity prediction head: at each t >= n the anchor
// h_{t-n}^{(b)} scores every candidate h_t^{(b')} of the batch by inner
// product; the target is b' = b. Summed over t, reduced over the batch.
// Frames are h_1 ... h_T'; the t = n term meets the zero padding h_0, whose
// logits are uniform, so it adds log B per item and no gradient.
template <typename T>
LossGrad<T> CpcLoss(const nn::Seq<T>& h, int n, Reduction r = Reduction::kMeanOverBatch) {
  FVAE_CHECK(n >= 1, ErrorCode::kConfigError, "CPC step count must be >= 1");
  FVAE_CHECK(h.frames > n, ErrorCode::kSegmentTooShort,
             "CPC needs more than n embedding frames");
  const int B = h.batch;
  const int D = h.channels();
  const double div = BatchDivisor(B, r);
  LossGrad<T> out;
  out.grad = nn::Matrix<T>::Zero(h.data.rows(), h.data.cols());
  Eigen::MatrixXd anchors(D, B), candidates(D, B);
  double total = 0.0;
  for (int t = n; t < h.frames; ++t) {
    for (int b = 0; b < B; ++b) {
      anchors.col(b) = h.data.col(static_cast<long>(b) * h.frames + t - n).template cast<double>();
      candidates.col(b) = h.data.col(static_cast<long>(b) * h.frames + t).template cast<double>();
    }
    const Eigen::MatrixXd logits = anchors.transpose() * candidates;  // [anchor x cand]
    Eigen::MatrixXd g(B, B);
    for (int b = 0; b < B; ++b) {
      const double zmax = logits.row(b).maxCoeff();
      const Eigen::RowVectorXd e = (logits.row(b).array() - zmax).exp();
      const double sum = e.sum();
      total += zmax + std::log(sum) - logits(b, b);
      g.row(b) = e / sum;
      g(b, b) -= 1.0;
    }
    g /= div;
    const Eigen::MatrixXd d_anchor = candidates * g.transpose();
    const Eigen::MatrixXd d_cand = anchors * g;
    for (int b = 0; b < B; ++b) {
      out.grad.col(static_cast<long>(b) * h.frames + t - n) += d_anchor.col(b).template cast<T>();
      out.grad.col(static_cast<long>(b) * h.frames + t) += d_cand.col(b).template cast<T>();
    }
  }
  total += B * std::log(static_cast<double>(B));
  out.value = total / div;
  return out;
}

enum class ObjectiveMode { kPlain, kAdversarialClassifier, kAdversarialCpc };

struct LossBreakdown {
  double l_rec = 0.0;
  double l_kld = 0.0;
  double l_adv = 0.0;
  double l_total = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  ObjectiveMode mode = ObjectiveMode::kPlain;
};

// plain: L_rec + beta * L_kld; adversarial modes subtract lambda * L_adv.
inline LossBreakdown Combine(double l_rec, double l_kld, double l_adv, ObjectiveMode mode,
                             double beta, double lambda) {
  LossBreakdown out;
  out.l_rec = l_rec;
  out.l_kld = l_kld;
  out.beta = beta;
  out.mode = mode;
  out.l_total = l_rec + beta * l_kld;
  if (mode != ObjectiveMode::kPlain) {
    out.l_adv = l_adv;
    out.lambda = lambda;
    out.l_total -= lambda * l_adv;
  }
  return out;
}

}  // namespace fvae

#endif  // FVAE_OBJECTIVES_HPP_
