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

#include <algorithm>
#include <set>

#include "fvae/corpus.hpp"
#include "fvae/error.hpp"
#include "fvae/io.hpp"

namespace fvae {

FeatureBank BuildFeatureBank(const SplitManifest& manifest,
                             const AudioLoader& load,
                             const FeatureConfig& cfg, bool keep_train_power,
                             const FeatureStats* stats) {
  cfg.Validate();
  FeatureBank bank;
  bank.config = cfg;
  std::set<std::string> speakers;
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest})
    for (const UtteranceRecord& r : manifest.get(s)) speakers.insert(r.speaker_id);
  bank.speakers.assign(speakers.begin(), speakers.end());

  const MelFilterbank fb = BuildFilterbank(cfg);
  std::vector<MelSpectrogram> raw_train;
  int max_phone = -1;
  auto featurize = [&](Split s, std::vector<UtteranceFeatures>& dst,
                       std::vector<MelSpectrogram>& raw) {
    for (const UtteranceRecord& r : manifest.get(s)) {
      const AudioClip clip = load(r);
      Eigen::MatrixXf power = PowerSpectrogram(clip, cfg);
      UtteranceFeatures u;
      u.utterance_id = r.utterance_id;
      u.speaker_id = r.speaker_id;
      u.speaker = bank.SpeakerIndex(r.speaker_id);
      raw.push_back(LogMelFromPower(power, fb, cfg));
      if (keep_train_power && s == Split::kTrain) u.power = std::move(power);
      u.phones = r.phone_labels;
      if (u.phones.empty() && !r.label_path.empty())
        u.phones = ReadLabels(r.label_path);
      if (!u.phones.empty()) {
        FVAE_CHECK(static_cast<int>(u.phones.size()) == raw.back().frames(),
                   ErrorCode::kAlignmentError,
                   r.utterance_id + ": label count differs from frame count");
        for (int p : u.phones) max_phone = std::max(max_phone, p);
      }
      dst.push_back(std::move(u));
    }
  };

  std::vector<MelSpectrogram> raw_val, raw_test;
  featurize(Split::kTrain, bank.train, raw_train);
  featurize(Split::kValidation, bank.validation, raw_val);
  featurize(Split::kTest, bank.test, raw_test);
  bank.stats = stats ? *stats : FitGlobalStats(raw_train);
  bank.n_phones = max_phone + 1;

  auto normalize = [&](std::vector<UtteranceFeatures>& dst,
                       const std::vector<MelSpectrogram>& raw) {
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i].normalized = ApplyGlobalNorm(raw[i], bank.stats);
  };
  normalize(bank.train, raw_train);
  normalize(bank.validation, raw_val);
  normalize(bank.test, raw_test);
  return bank;
}

FeatureBank ToyFeatureBank(const ToyCorpus& corpus, const FeatureConfig& cfg,
                           std::uint64_t split_seed, bool keep_train_power) {
  std::vector<UtteranceRecord> records = corpus.records;
  for (std::size_t i = 0; i < records.size(); ++i)
    records[i].path = std::to_string(i);
  const SplitManifest manifest = SplitCorpus(std::move(records), split_seed);
  return BuildFeatureBank(
      manifest,
      [&](const UtteranceRecord& r) { return corpus.audio[std::stoul(r.path)]; },
      cfg, keep_train_power);
}

}  // namespace fvae
