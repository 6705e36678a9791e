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

#ifndef FVAE_CORPUS_HPP_
#define FVAE_CORPUS_HPP_

// Dataset ingestion: utterance manifests, the per-speaker 80/10/10 split,
// in-memory feature banks, segment batch sampling and the synthetic toy
// corpus used for desk-scale experiments.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fvae/features.hpp"
#include "fvae/random.hpp"

namespace fvae {

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::string path;        // audio (.wav) or feature archive
  std::string label_path;  // optional per-frame phone label sidecar
  double duration = 0.0;   // seconds
  std::vector<int> phone_labels;
};

enum class Split { kTrain, kValidation, kTest };
const char* SplitName(Split s);

struct SplitManifest {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> validation;
  std::vector<UtteranceRecord> test;
  std::uint64_t split_seed = 0;

  const std::vector<UtteranceRecord>& get(Split s) const;
};

// Per-speaker 80/10/10 partition; every speaker lands in all three splits.
SplitManifest SplitCorpus(std::vector<UtteranceRecord> records,
                          std::uint64_t seed);

// JSON lines: {utterance_id, speaker_id, path, duration, split[, labels]}.
// Relative paths are resolved against the manifest's directory on read.
void WriteManifest(const std::string& path, const SplitManifest& manifest);
SplitManifest ReadManifest(const std::string& path);

// ---------------------------------------------------------------------------
// Feature banks.

struct UtteranceFeatures {
  std::string utterance_id;
  std::string speaker_id;
  int speaker = -1;                 // index into FeatureBank::speakers
  MelSpectrogram normalized;        // globally normalised log-mel
  Eigen::MatrixXf power;            // |STFT|^2, kept for VTLP (train only)
  std::vector<int> phones;          // per-frame labels, may be empty
};

struct FeatureBank {
  FeatureConfig config;
  FeatureStats stats;
  std::vector<std::string> speakers;  // sorted speaker ids
  int n_phones = 0;
  std::vector<UtteranceFeatures> train;
  std::vector<UtteranceFeatures> validation;
  std::vector<UtteranceFeatures> test;

  const std::vector<UtteranceFeatures>& get(Split s) const;
  int SpeakerIndex(const std::string& id) const;
};

using AudioLoader = std::function<AudioClip(const UtteranceRecord&)>;

// Computes raw log-mel for every utterance, fits global statistics on the
// training split (unless `stats` is given) and normalises all splits.
FeatureBank BuildFeatureBank(const SplitManifest& manifest,
                             const AudioLoader& load,
                             const FeatureConfig& cfg, bool keep_train_power,
                             const FeatureStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Segment sampling.

struct SegmentRef {
  int utterance = 0;  // index into the pool
  int start = 0;      // first frame
  int frames = 0;
};

struct SegmentSpec {
  int batch = 48;
  double min_seconds = 2.0;
  double max_seconds = 3.0;
  bool paired = false;
  double paired_min_seconds = 4.0;
  double paired_max_seconds = 6.0;
};

struct SegmentBatch {
  int batch_size = 0;
  int crop_frames = 0;
  int bands = 0;
  // [bands x batch*crop_frames]; item b owns columns [b*T, (b+1)*T).
  Eigen::MatrixXf features;
  std::optional<Eigen::MatrixXf> pair_features;
  std::vector<int> speaker_ids;
  std::vector<SegmentRef> items;
  std::vector<SegmentRef> pairs;  // empty in unpaired mode
};

// Unpaired: one crop length per batch drawn from [min, max] seconds.
// Paired: crops of [paired_min, paired_max] seconds split at the midpoint,
// contributing both (first -> second) and (second -> first) items.
SegmentBatch SampleSegmentBatch(const std::vector<UtteranceFeatures>& pool,
                                const SegmentSpec& spec,
                                const FeatureConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Toy corpus.

struct ToyCorpusConfig {
  int n_speakers = 8;
  int n_phones = 10;
  int utterances_per_speaker = 30;
  double min_duration = 4.0;  // seconds
  double max_duration = 7.0;
  double phone_min = 0.10;
  double phone_max = 0.30;
  // When set, phone sequences are drawn from this seed instead of the main
  // stream, leaving the speaker and phone inventories untouched.
  std::optional<std::uint64_t> sequence_seed;
};

struct ToyCorpus {
  std::vector<UtteranceRecord> records;  // phone_labels at frame rate
  std::vector<AudioClip> audio;          // parallel to records
};

ToyCorpus GenerateToyCorpus(const ToyCorpusConfig& cfg,
                            const FeatureConfig& fcfg, std::uint64_t seed);

// Writes audio/<id>.wav, labels/<id>.lab and manifest.jsonl under `dir`.
SplitManifest WriteToyCorpus(const std::string& dir, const ToyCorpus& corpus,
                             std::uint64_t split_seed);

// Convenience: split and featurize an in-memory toy corpus.
FeatureBank ToyFeatureBank(const ToyCorpus& corpus, const FeatureConfig& cfg,
                           std::uint64_t split_seed, bool keep_train_power);

}  // namespace fvae

#endif  // FVAE_CORPUS_HPP_
