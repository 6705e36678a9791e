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

// Synthetic speech-like corpus. Every speaker is a fixed source-filter
// setting (pitch, vocal tract scale, static spectral colouring, breathiness);
// every phone is a fixed formant template, voiced or noise excited.
// Utterances are random phone sequences rendered through a speaker.

#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>

#include "fvae/corpus.hpp"
#include "fvae/error.hpp"
#include "fvae/io.hpp"
#include "real_fft.hpp"

namespace fvae {

namespace {

struct Bump {
  double center_mel;
  double width_mel;
  double gain_db;
};

struct SpeakerTraits {
  double f0;
  double formant_scale;
  double breathiness;
  double tilt_db_per_khz;
  std::vector<Bump> bumps;
};

struct PhoneTemplate {
  bool voiced;
  std::array<double, 3> formants;
  std::array<double, 3> bandwidths;
  std::array<double, 3> gains;
  double level_db;
};

SpeakerTraits DrawSpeaker(Rng& rng) {
  SpeakerTraits s;
  s.f0 = std::exp(UniformReal(rng, std::log(90.0), std::log(250.0)));
  s.formant_scale = UniformReal(rng, 0.85, 1.18);
  s.breathiness = UniformReal(rng, 0.02, 0.15);
  s.tilt_db_per_khz = UniformReal(rng, -2.0, 1.0);
  const double top = HzToMel(8000.0);
  for (int i = 0; i < 3; ++i)
    s.bumps.push_back({UniformReal(rng, 0.1 * top, 0.95 * top),
                       UniformReal(rng, 80.0, 250.0),
                       UniformReal(rng, -8.0, 8.0)});
  return s;
}

PhoneTemplate DrawPhone(Rng& rng, bool voiced) {
  PhoneTemplate p;
  p.voiced = voiced;
  if (voiced) {
    p.formants = {UniformReal(rng, 250.0, 850.0), UniformReal(rng, 850.0, 2400.0),
                  UniformReal(rng, 2200.0, 3400.0)};
    p.bandwidths = {UniformReal(rng, 60.0, 120.0), UniformReal(rng, 80.0, 160.0),
                    UniformReal(rng, 120.0, 250.0)};
    p.gains = {1.0, UniformReal(rng, 0.3, 0.9), UniformReal(rng, 0.1, 0.5)};
    p.level_db = UniformReal(rng, -3.0, 3.0);
  } else {
    p.formants = {UniformReal(rng, 1500.0, 3000.0), UniformReal(rng, 3000.0, 5000.0),
                  UniformReal(rng, 5000.0, 7000.0)};
    p.bandwidths = {UniformReal(rng, 400.0, 900.0), UniformReal(rng, 600.0, 1500.0),
                    UniformReal(rng, 800.0, 2000.0)};
    p.gains = {UniformReal(rng, 0.2, 1.0), UniformReal(rng, 0.2, 1.0),
               UniformReal(rng, 0.2, 1.0)};
    p.level_db = UniformReal(rng, -10.0, -4.0);
  }
  return p;
}

// Templates must differ by at least ~12% in one of the first two formants.
bool Distinct(const PhoneTemplate& a, const PhoneTemplate& b) {
  if (a.voiced != b.voiced) return true;
  const double d1 = std::abs(std::log(a.formants[0] / b.formants[0]));
  const double d2 = std::abs(std::log(a.formants[1] / b.formants[1]));
  return std::max(d1, d2) > 0.12;
}

double SpeakerGain(const SpeakerTraits& s, double f) {
  double db = s.tilt_db_per_khz * f / 1000.0;
  const double m = HzToMel(f);
  for (const Bump& b : s.bumps) {
    const double z = (m - b.center_mel) / b.width_mel;
    db += b.gain_db * std::exp(-0.5 * z * z);
  }
  return std::pow(10.0, db / 20.0);
}

double PhoneEnvelope(const PhoneTemplate& p, double scale, double f) {
  double amp = 0.02;
  for (int i = 0; i < 3; ++i) {
    const double z = (f - scale * p.formants[i]) / (0.5 * scale * p.bandwidths[i]);
    amp += p.gains[i] / (1.0 + z * z);
  }
  return amp;
}

int NextPow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

ToyCorpus GenerateToyCorpus(const ToyCorpusConfig& cfg,
                            const FeatureConfig& fcfg, std::uint64_t seed) {
  FVAE_CHECK(cfg.n_speakers >= 2, ErrorCode::kConfigError,
             "toy corpus needs at least two speakers");
  FVAE_CHECK(cfg.n_phones >= 2, ErrorCode::kConfigError,
             "toy corpus needs at least two phones");
  FVAE_CHECK(cfg.utterances_per_speaker >= 1, ErrorCode::kConfigError,
             "utterances_per_speaker must be >= 1");
  FVAE_CHECK(cfg.min_duration > 0.0 && cfg.min_duration <= cfg.max_duration,
             ErrorCode::kConfigError, "invalid duration range");
  FVAE_CHECK(cfg.phone_min > 0.0 && cfg.phone_min <= cfg.phone_max,
             ErrorCode::kConfigError, "invalid phone duration range");
  fcfg.Validate();
  const int sr = fcfg.sample_rate;

  Rng inventory(DeriveSeed(seed, 0));
  std::vector<SpeakerTraits> speakers;
  for (int s = 0; s < cfg.n_speakers; ++s) speakers.push_back(DrawSpeaker(inventory));
  std::vector<PhoneTemplate> phones;
  const int n_unvoiced = std::max(1, cfg.n_phones / 5);
  for (int p = 0; p < cfg.n_phones; ++p) {
    const bool voiced = p >= n_unvoiced;
    PhoneTemplate cand = DrawPhone(inventory, voiced);
    for (int attempt = 0; attempt < 200; ++attempt) {
      bool ok = true;
      for (const PhoneTemplate& q : phones) ok = ok && Distinct(cand, q);
      if (ok) break;
      cand = DrawPhone(inventory, voiced);
    }
    phones.push_back(cand);
  }

  Rng seq(cfg.sequence_seed.value_or(DeriveSeed(seed, 1)));
  std::map<int, std::unique_ptr<RealFft>> ffts;
  const int fade = sr / 100;  // 10 ms cross-fade on each side

  ToyCorpus corpus;
  for (int s = 0; s < cfg.n_speakers; ++s) {
    const SpeakerTraits& spk = speakers[s];
    for (int u = 0; u < cfg.utterances_per_speaker; ++u) {
      const int n = static_cast<int>(
          std::lround(UniformReal(seq, cfg.min_duration, cfg.max_duration) * sr));
      std::vector<int> sample_label(n);
      std::vector<std::pair<int, int>> segments;  // (start, phone)
      for (int pos = 0; pos < n;) {
        const int len = static_cast<int>(
            std::lround(UniformReal(seq, cfg.phone_min, cfg.phone_max) * sr));
        const int phone = UniformInt(seq, 0, cfg.n_phones - 1);
        segments.emplace_back(pos, phone);
        for (int i = pos; i < std::min(n, pos + len); ++i) sample_label[i] = phone;
        pos += len;
      }

      // Excitation over the padded utterance; offset `fade` maps to sample 0.
      const int padded = n + 2 * fade;
      std::vector<double> pulses(padded, 0.0), noise(padded);
      const double drift = UniformReal(seq, 0.97, 1.03);
      const double vib_phase = UniformReal(seq, 0.0, 2.0 * std::numbers::pi);
      double phase = 0.0;
      for (int i = 0; i < padded; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double f0 = spk.f0 * drift *
                          (1.0 + 0.04 * std::sin(2.0 * std::numbers::pi * 3.0 * t + vib_phase));
        phase += f0 / sr;
        if (phase >= 1.0) {
          phase -= 1.0;
          pulses[i] = std::sqrt(sr / f0);
        }
        noise[i] = StandardNormal(seq);
      }

      std::vector<double> out(padded, 0.0);
      for (std::size_t k = 0; k < segments.size(); ++k) {
        const int start = segments[k].first;
        const int end = k + 1 < segments.size() ? segments[k + 1].first : n;
        const PhoneTemplate& ph = phones[segments[k].second];
        const int len = end - start + 2 * fade;
        const int nfft = NextPow2(2 * len);
        auto& fft = ffts[nfft];
        if (!fft) fft = std::make_unique<RealFft>(nfft);
        double* buf = fft->real();
        for (int i = 0; i < nfft; ++i) buf[i] = 0.0;
        const double gain = std::pow(10.0, ph.level_db / 20.0);
        for (int i = 0; i < len; ++i) {
          const int at = start + i;  // index into padded buffers
          buf[i] = ph.voiced ? pulses[at] + spk.breathiness * 3.0 * noise[at]
                             : noise[at];
        }
        fft->Forward();
        std::complex<double>* spec = fft->spectrum();
        for (int b = 0; b <= nfft / 2; ++b) {
          const double f = static_cast<double>(b) * sr / nfft;
          double h = gain * SpeakerGain(spk, f) *
                     PhoneEnvelope(ph, spk.formant_scale, f);
          if (ph.voiced) h /= 1.0 + f / 300.0;
          spec[b] *= h / nfft;
        }
        fft->Inverse();
        for (int i = 0; i < len; ++i) {
          double w = 1.0;
          if (i < 2 * fade && start > 0)
            w = 0.5 - 0.5 * std::cos(std::numbers::pi * i / (2 * fade));
          const int from_end = len - 1 - i;
          if (from_end < 2 * fade && end < n)
            w *= 0.5 - 0.5 * std::cos(std::numbers::pi * from_end / (2 * fade));
          out[start + i] += w * buf[i];
        }
      }

      AudioClip clip;
      clip.sample_rate = sr;
      clip.samples.resize(n);
      double energy = 0.0;
      for (int i = 0; i < n; ++i) energy += out[fade + i] * out[fade + i];
      const double scale = 0.1 / std::sqrt(energy / n + 1e-20);
      for (int i = 0; i < n; ++i)
        clip.samples[i] =
            static_cast<float>(out[fade + i] * scale + 1e-4 * StandardNormal(seq));

      UtteranceRecord rec;
      char id[64];
      std::snprintf(id, sizeof(id), "spk%02d_utt%03d", s, u);
      rec.utterance_id = id;
      std::snprintf(id, sizeof(id), "spk%02d", s);
      rec.speaker_id = id;
      rec.duration = static_cast<double>(n) / sr;
      const int frames = NumFrames(n, fcfg);
      rec.phone_labels.resize(frames);
      for (int t = 0; t < frames; ++t)
        rec.phone_labels[t] =
            sample_label[t * fcfg.hop_samples() + fcfg.frame_samples() / 2];
      corpus.records.push_back(std::move(rec));
      corpus.audio.push_back(std::move(clip));
    }
  }
  return corpus;
}

SplitManifest WriteToyCorpus(const std::string& dir, const ToyCorpus& corpus,
                             std::uint64_t split_seed) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "audio", ec);
  fs::create_directories(fs::path(dir) / "labels", ec);
  FVAE_CHECK(!ec, ErrorCode::kIoError, "cannot create " + dir);
  std::vector<UtteranceRecord> records = corpus.records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    UtteranceRecord& r = records[i];
    r.path = "audio/" + r.utterance_id + ".wav";
    r.label_path = "labels/" + r.utterance_id + ".lab";
    WriteWav((fs::path(dir) / r.path).string(), corpus.audio[i]);
    WriteLabels((fs::path(dir) / r.label_path).string(), r.phone_labels);
    r.phone_labels.clear();
  }
  const SplitManifest manifest = SplitCorpus(std::move(records), split_seed);
  const std::string path = (fs::path(dir) / "manifest.jsonl").string();
  WriteManifest(path, manifest);
  return ReadManifest(path);
}

}  // namespace fvae
