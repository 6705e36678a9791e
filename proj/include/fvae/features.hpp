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

#ifndef FVAE_FEATURES_HPP_
#define FVAE_FEATURES_HPP_

// Log-mel feature extraction, vocal tract length perturbation and the two
// normalisation schemes (global per-band standardisation fitted on the
// training split, and per-utterance instance normalisation).

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "fvae/random.hpp"

namespace fvae {

struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 16000;
};

struct FeatureConfig {
  int sample_rate = 16000;
  double frame_ms = 30.0;
  double hop_ms = 10.0;
  int n_mels = 80;
  int fft_size = 512;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;

  int frame_samples() const;
  int hop_samples() const;
  int n_bins() const { return fft_size / 2 + 1; }
  // Throws ConfigError when the invariants do not hold.
  void Validate() const;
  std::string ToJson() const;
  // Missing keys keep their defaults.
  static FeatureConfig FromJson(const std::string& text);
};

struct MelFilterbank {
  Eigen::MatrixXf weights;           // [n_mels x n_bins]
  std::vector<double> center_freqs;  // [n_mels], Hz
};

struct VtlpParams {
  double alpha = 1.0;      // warp factor, in [0.8, 1.25]
  double f_hi_frac = 0.7;  // boundary frequency as a fraction of f_max
};

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> std;
  long long n_frames_seen = 0;

  std::string ToJson() const;
  static FeatureStats FromJson(const std::string& text);
  void Save(const std::string& path) const;
  static FeatureStats Load(const std::string& path);
};

enum class NormState { kRaw, kGlobal, kInstance };
const char* NormStateName(NormState s);
NormState ParseNormState(const std::string& s);

struct MelSpectrogram {
  Eigen::MatrixXf values;  // [bands x frames]
  NormState norm_state = NormState::kRaw;

  int bands() const { return static_cast<int>(values.rows()); }
  int frames() const { return static_cast<int>(values.cols()); }
};

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// Number of frames produced for a clip of `num_samples` samples.
int NumFrames(long num_samples, const FeatureConfig& cfg);

// Piecewise-linear frequency warp. `f_hi` is in Hz.
double VtlpWarpFrequency(double f, double alpha, double f_hi, double f_max);
VtlpParams SampleVtlpParams(Rng& rng);

MelFilterbank BuildFilterbank(const FeatureConfig& cfg);
MelFilterbank BuildWarpedFilterbank(const FeatureConfig& cfg,
                                    const VtlpParams& params);

// |STFT|^2, Hann window, frames zero-padded to fft_size. [n_bins x T].
Eigen::MatrixXf PowerSpectrogram(const AudioClip& clip,
                                 const FeatureConfig& cfg);
MelSpectrogram LogMelFromPower(const Eigen::Ref<const Eigen::MatrixXf>& power,
                               const MelFilterbank& fb,
                               const FeatureConfig& cfg);
MelSpectrogram ComputeLogMel(const AudioClip& clip, const FeatureConfig& cfg,
                             const MelFilterbank& fb);

FeatureStats FitGlobalStats(std::span<const MelSpectrogram> raw);
MelSpectrogram ApplyGlobalNorm(const MelSpectrogram& x,
                               const FeatureStats& stats);
MelSpectrogram RemoveGlobalNorm(const MelSpectrogram& x,
                                const FeatureStats& stats);

inline constexpr double kInstanceNormEps = 1e-5;
MelSpectrogram InstanceNormalize(const MelSpectrogram& x);

// Denormalise, pseudo-invert the mel projection and run Griffin-Lim.
AudioClip InvertToAudio(const MelSpectrogram& x, const FeatureStats& stats,
                        const FeatureConfig& cfg, int iterations = 32,
                        std::uint64_t seed = 0);

}  // namespace fvae

#endif  // FVAE_FEATURES_HPP_
