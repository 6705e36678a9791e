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

#include "fvae/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fvae/error.hpp"
#include "real_fft.hpp"
#include "json.hpp"

namespace fvae {

namespace {

std::vector<double> HannWindow(int length) {
  std::vector<double> w(length);
  for (int i = 0; i < length; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  return w;
}

MelFilterbank TriangularFilterbank(const FeatureConfig& cfg,
                                   const std::vector<double>& edges_hz) {
  const int n_mels = cfg.n_mels;
  const int n_bins = cfg.n_bins();
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
  MelFilterbank fb;
  fb.weights = Eigen::MatrixXf::Zero(n_mels, n_bins);
  fb.center_freqs.resize(n_mels);
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges_hz[m];
    const double center = edges_hz[m + 1];
    const double right = edges_hz[m + 2];
    fb.center_freqs[m] = center;
    bool any = false;
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      if (w > 0.0) {
        fb.weights(m, k) = static_cast<float>(w);
        any = true;
      }
    }
    // A filter narrower than one bin still gets a single-bin support.
    if (!any) {
      const int k = std::clamp(static_cast<int>(std::lround(center / bin_hz)),
                               0, n_bins - 1);
      fb.weights(m, k) = 1.0f;
    }
  }
  return fb;
}

std::vector<double> MelEdges(const FeatureConfig& cfg) {
  const double lo = HzToMel(cfg.f_min);
  const double hi = HzToMel(cfg.f_max);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    const double hz = MelToHz(lo + (hi - lo) * i / (cfg.n_mels + 1));
    edges[i] = std::clamp(hz, cfg.f_min, cfg.f_max);
  }
  edges.front() = cfg.f_min;
  edges.back() = cfg.f_max;
  return edges;
}

}  // namespace

int FeatureConfig::frame_samples() const {
  return static_cast<int>(std::lround(frame_ms * sample_rate / 1000.0));
}

int FeatureConfig::hop_samples() const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FeatureConfig::Validate() const {
  FVAE_CHECK(sample_rate == 16000, ErrorCode::kConfigError,
             "sample_rate must be 16000");
  FVAE_CHECK(n_mels >= 1, ErrorCode::kConfigError, "n_mels must be >= 1");
  FVAE_CHECK(hop_samples() >= 1, ErrorCode::kConfigError, "hop too small");
  FVAE_CHECK(frame_samples() >= 1 && frame_samples() <= fft_size,
             ErrorCode::kConfigError, "frame length must fit in fft_size");
  FVAE_CHECK(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0,
             ErrorCode::kConfigError, "need 0 <= f_min < f_max <= sr/2");
  FVAE_CHECK(log_floor > 0.0, ErrorCode::kConfigError,
             "log_floor must be positive");
}

std::string FeatureConfig::ToJson() const {
  const nlohmann::json j = {{"sample_rate", sample_rate}, {"frame_ms", frame_ms},
                            {"hop_ms", hop_ms},           {"n_mels", n_mels},
                            {"fft_size", fft_size},       {"f_min", f_min},
                            {"f_max", f_max},             {"log_floor", log_floor}};
  return j.dump(2);
}

FeatureConfig FeatureConfig::FromJson(const std::string& text) {
  FeatureConfig f;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    FVAE_CHECK(j.is_object(), ErrorCode::kConfigError, "feature config must be an object");
    f.sample_rate = j.value("sample_rate", f.sample_rate);
    f.frame_ms = j.value("frame_ms", f.frame_ms);
    f.hop_ms = j.value("hop_ms", f.hop_ms);
    f.n_mels = j.value("n_mels", f.n_mels);
    f.fft_size = j.value("fft_size", f.fft_size);
    f.f_min = j.value("f_min", f.f_min);
    f.f_max = j.value("f_max", f.f_max);
    f.log_floor = j.value("log_floor", f.log_floor);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kConfigError, std::string("feature config: ") + e.what());
  }
  f.Validate();
  return f;
}

const char* NormStateName(NormState s) {
  switch (s) {
    case NormState::kRaw: return "raw";
    case NormState::kGlobal: return "global";
    case NormState::kInstance: return "instance";
  }
  return "raw";
}

NormState ParseNormState(const std::string& s) {
  if (s == "raw") return NormState::kRaw;
  if (s == "global") return NormState::kGlobal;
  if (s == "instance") return NormState::kInstance;
  Fail(ErrorCode::kFormatError, "unknown norm_state '" + s + "'");
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int NumFrames(long num_samples, const FeatureConfig& cfg) {
  const long frame = cfg.frame_samples();
  if (num_samples < frame) return 0;
  return static_cast<int>(1 + (num_samples - frame) / cfg.hop_samples());
}

double VtlpWarpFrequency(double f, double alpha, double f_hi, double f_max) {
  FVAE_CHECK(f >= 0.0 && f <= f_max, ErrorCode::kDomainError,
             "frequency outside [0, f_max]");
  const double scale = std::min(alpha, 1.0);
  const double boundary = f_hi * scale / alpha;
  if (f <= boundary) return alpha * f;
  return f_max + (f_max - f_hi * scale) / (f_max - boundary) * (f - f_max);
}

VtlpParams SampleVtlpParams(Rng& rng) {
  VtlpParams p;
  p.alpha = std::exp(UniformReal(rng, std::log(0.8), std::log(1.25)));
  p.f_hi_frac = UniformReal(rng, 0.6, 0.8);
  return p;
}

MelFilterbank BuildFilterbank(const FeatureConfig& cfg) {
  cfg.Validate();
  return TriangularFilterbank(cfg, MelEdges(cfg));
}

MelFilterbank BuildWarpedFilterbank(const FeatureConfig& cfg,
                                    const VtlpParams& params) {
  cfg.Validate();
  FVAE_CHECK(params.alpha >= 0.8 - 1e-12 && params.alpha <= 1.25 + 1e-12,
             ErrorCode::kDomainError, "VTLP alpha outside [0.8, 1.25]");
  FVAE_CHECK(params.f_hi_frac >= 0.6 - 1e-12 && params.f_hi_frac <= 0.8 + 1e-12,
             ErrorCode::kDomainError, "VTLP f_hi_frac outside [0.6, 0.8]");
  std::vector<double> edges = MelEdges(cfg);
  const double f_hi = params.f_hi_frac * cfg.f_max;
  for (double& e : edges)
    e = VtlpWarpFrequency(e, params.alpha, f_hi, cfg.f_max);
  return TriangularFilterbank(cfg, edges);
}

Eigen::MatrixXf PowerSpectrogram(const AudioClip& clip,
                                 const FeatureConfig& cfg) {
  cfg.Validate();
  FVAE_CHECK(clip.sample_rate == cfg.sample_rate, ErrorCode::kConfigError,
             "clip sample rate differs from feature config");
  const int frames = NumFrames(static_cast<long>(clip.samples.size()), cfg);
  FVAE_CHECK(frames >= 1, ErrorCode::kInputTooShort,
             "clip shorter than one frame");
  const int frame = cfg.frame_samples();
  const int hop = cfg.hop_samples();
  const std::vector<double> window = HannWindow(frame);
  RealFft fft(cfg.fft_size);
  Eigen::MatrixXf power(cfg.n_bins(), frames);
  for (int t = 0; t < frames; ++t) {
    double* buf = fft.real();
    const float* src = clip.samples.data() + static_cast<long>(t) * hop;
    for (int i = 0; i < frame; ++i) buf[i] = src[i] * window[i];
    for (int i = frame; i < cfg.fft_size; ++i) buf[i] = 0.0;
    fft.Forward();
    const std::complex<double>* spec = fft.spectrum();
    for (int k = 0; k < cfg.n_bins(); ++k)
      power(k, t) = static_cast<float>(std::norm(spec[k]));
  }
  return power;
}

MelSpectrogram LogMelFromPower(const Eigen::Ref<const Eigen::MatrixXf>& power,
                               const MelFilterbank& fb,
                               const FeatureConfig& cfg) {
  FVAE_CHECK(power.rows() == fb.weights.cols(), ErrorCode::kShapeError,
             "power spectrogram bins differ from filterbank");
  MelSpectrogram out;
  out.values.noalias() = fb.weights * power;
  const float floor = static_cast<float>(cfg.log_floor);
  out.values = out.values.array().max(floor).log().matrix();
  out.norm_state = NormState::kRaw;
  return out;
}

MelSpectrogram ComputeLogMel(const AudioClip& clip, const FeatureConfig& cfg,
                             const MelFilterbank& fb) {
  return LogMelFromPower(PowerSpectrogram(clip, cfg), fb, cfg);
}

FeatureStats FitGlobalStats(std::span<const MelSpectrogram> raw) {
  FVAE_CHECK(!raw.empty(), ErrorCode::kInsufficientData,
             "no utterances to fit statistics on");
  const int bands = raw.front().bands();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(bands);
  long long n = 0;
  for (const MelSpectrogram& x : raw) {
    FVAE_CHECK(x.bands() == bands, ErrorCode::kShapeError,
               "band count differs across utterances");
    sum += x.values.cast<double>().rowwise().sum();
    n += x.frames();
  }
  FVAE_CHECK(n > 0, ErrorCode::kInsufficientData, "no frames");
  const Eigen::VectorXd mean = sum / static_cast<double>(n);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(bands);
  for (const MelSpectrogram& x : raw) {
    sq += (x.values.cast<double>().colwise() - mean)
              .array()
              .square()
              .rowwise()
              .sum()
              .matrix();
  }
  FeatureStats stats;
  stats.n_frames_seen = n;
  stats.mean.resize(bands);
  stats.std.resize(bands);
  for (int b = 0; b < bands; ++b) {
    const double sd = std::sqrt(sq[b] / static_cast<double>(n));
    FVAE_CHECK(sd >= 1e-8, ErrorCode::kDegenerateBand,
               "band " + std::to_string(b) + " has zero variance");
    stats.mean[b] = mean[b];
    stats.std[b] = sd;
  }
  return stats;
}

MelSpectrogram ApplyGlobalNorm(const MelSpectrogram& x,
                               const FeatureStats& stats) {
  FVAE_CHECK(static_cast<int>(stats.mean.size()) == x.bands(),
             ErrorCode::kShapeError, "stats band count differs from input");
  MelSpectrogram out;
  out.values.resize(x.bands(), x.frames());
  for (int b = 0; b < x.bands(); ++b) {
    FVAE_CHECK(stats.std[b] >= 1e-8, ErrorCode::kDegenerateBand,
               "band " + std::to_string(b) + " has zero std");
    out.values.row(b) =
        ((x.values.row(b).cast<double>().array() - stats.mean[b]) /
         stats.std[b])
            .cast<float>();
  }
  out.norm_state = NormState::kGlobal;
  return out;
}

MelSpectrogram RemoveGlobalNorm(const MelSpectrogram& x,
                                const FeatureStats& stats) {
  FVAE_CHECK(static_cast<int>(stats.mean.size()) == x.bands(),
             ErrorCode::kShapeError, "stats band count differs from input");
  MelSpectrogram out;
  out.values.resize(x.bands(), x.frames());
  for (int b = 0; b < x.bands(); ++b) {
    out.values.row(b) = (x.values.row(b).cast<double>().array() * stats.std[b] +
                         stats.mean[b])
                            .cast<float>();
  }
  out.norm_state = NormState::kRaw;
  return out;
}

MelSpectrogram InstanceNormalize(const MelSpectrogram& x) {
  FVAE_CHECK(x.frames() >= 2, ErrorCode::kInputTooShort,
             "instance normalisation needs at least two frames");
  MelSpectrogram out;
  out.values.resize(x.bands(), x.frames());
  for (int b = 0; b < x.bands(); ++b) {
    const Eigen::ArrayXd row = x.values.row(b).cast<double>().array();
    const double mean = row.mean();
    const double var = (row - mean).square().mean();
    const double inv = 1.0 / std::sqrt(std::max(var, kInstanceNormEps));
    out.values.row(b) = ((row - mean) * inv).cast<float>().matrix().transpose();
  }
  out.norm_state = NormState::kInstance;
  return out;
}

AudioClip InvertToAudio(const MelSpectrogram& x, const FeatureStats& stats,
                        const FeatureConfig& cfg, int iterations,
                        std::uint64_t seed) {
  FVAE_CHECK(x.norm_state == NormState::kGlobal, ErrorCode::kConfigError,
             "inversion expects a globally normalised spectrogram");
  cfg.Validate();
  const MelSpectrogram raw = RemoveGlobalNorm(x, stats);
  const MelFilterbank fb = BuildFilterbank(cfg);
  const Eigen::MatrixXd pinv =
      fb.weights.cast<double>().completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd power =
      (pinv * raw.values.cast<double>().array().exp().matrix()).cwiseMax(0.0);
  const Eigen::MatrixXd magnitude = power.cwiseSqrt();

  const int frames = x.frames();
  const int frame = cfg.frame_samples();
  const int hop = cfg.hop_samples();
  const int n_bins = cfg.n_bins();
  const int length = (frames - 1) * hop + frame;
  const std::vector<double> window = HannWindow(frame);
  std::vector<double> norm(length, 0.0);
  for (int t = 0; t < frames; ++t)
    for (int i = 0; i < frame; ++i) norm[t * hop + i] += window[i] * window[i];

  Rng rng(seed);
  Eigen::MatrixXcd spec(n_bins, frames);
  for (int t = 0; t < frames; ++t)
    for (int k = 0; k < n_bins; ++k)
      spec(k, t) = std::polar(magnitude(k, t),
                              UniformReal(rng, -std::numbers::pi, std::numbers::pi));

  RealFft fft(cfg.fft_size);
  std::vector<double> signal(length);
  auto synthesize = [&]() {
    std::fill(signal.begin(), signal.end(), 0.0);
    for (int t = 0; t < frames; ++t) {
      std::complex<double>* s = fft.spectrum();
      for (int k = 0; k < n_bins; ++k) s[k] = spec(k, t);
      fft.Inverse();
      const double* buf = fft.real();
      for (int i = 0; i < frame; ++i)
        signal[t * hop + i] += buf[i] / cfg.fft_size * window[i];
    }
    for (int i = 0; i < length; ++i)
      if (norm[i] > 1e-8) signal[i] /= norm[i];
  };
  for (int it = 0; it < iterations; ++it) {
    synthesize();
    for (int t = 0; t < frames; ++t) {
      double* buf = fft.real();
      for (int i = 0; i < frame; ++i) buf[i] = signal[t * hop + i] * window[i];
      for (int i = frame; i < cfg.fft_size; ++i) buf[i] = 0.0;
      fft.Forward();
      const std::complex<double>* s = fft.spectrum();
      for (int k = 0; k < n_bins; ++k) {
        const double mag = std::abs(s[k]);
        spec(k, t) = mag > 1e-12 ? magnitude(k, t) * (s[k] / mag)
                                 : std::complex<double>(magnitude(k, t), 0.0);
      }
    }
  }
  synthesize();

  AudioClip clip;
  clip.sample_rate = cfg.sample_rate;
  clip.samples.assign(signal.begin(), signal.end());
  return clip;
}

std::string FeatureStats::ToJson() const {
  nlohmann::json j;
  j["mean"] = mean;
  j["std"] = std;
  j["n_frames_seen"] = n_frames_seen;
  return j.dump(2);
}

FeatureStats FeatureStats::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, std::string("feature stats: ") + e.what());
  }
  for (const char* key : {"mean", "std", "n_frames_seen"})
    FVAE_CHECK(j.contains(key), ErrorCode::kFormatError,
               std::string("feature stats missing '") + key + "'");
  FeatureStats s;
  s.mean = j["mean"].get<std::vector<double>>();
  s.std = j["std"].get<std::vector<double>>();
  s.n_frames_seen = j["n_frames_seen"].get<long long>();
  FVAE_CHECK(s.mean.size() == s.std.size(), ErrorCode::kFormatError,
             "feature stats mean/std length mismatch");
  for (double sd : s.std)
    FVAE_CHECK(sd > 0.0, ErrorCode::kDegenerateBand, "non-positive std");
  return s;
}

void FeatureStats::Save(const std::string& path) const {
  std::ofstream out(path);
  FVAE_CHECK(out.good(), ErrorCode::kIoError, "cannot write " + path);
  out << ToJson() << "\n";
}

FeatureStats FeatureStats::Load(const std::string& path) {
  std::ifstream in(path);
  FVAE_CHECK(in.good(), ErrorCode::kIoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

}  // namespace fvae
